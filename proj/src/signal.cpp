#include "vfdt_rf/signal.hpp"

#include <cmath>
#include <numbers>

#include "vfdt_rf/error.hpp"

namespace vfdt_rf {

void validate_signal(std::span<const double> i_samples, std::span<const double> q_samples,
                     double sample_rate_hz) {
    if (i_samples.size() != q_samples.size() || i_samples.empty()) {
        throw Error(ErrorCode::LengthMismatch,
                    "I has " + std::to_string(i_samples.size()) + " samples, Q has " +
                        std::to_string(q_samples.size()) + " (need equal and >= 1)");
    }
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw Error(ErrorCode::BadSampleRate, "sample rate must be finite and > 0");
    }
    for (std::size_t n = 0; n < i_samples.size(); ++n) {
        if (!std::isfinite(i_samples[n]) || !std::isfinite(q_samples[n])) {
            throw Error(ErrorCode::NonFiniteSample, "sample " + std::to_string(n) + " is NaN or Inf");
        }
    }
}

void validate_signal(const IQSignal& sig) { validate_signal(sig.i(), sig.q(), sig.sample_rate_hz()); }

IQSignal::IQSignal(std::vector<double> i_samples, std::vector<double> q_samples, double sample_rate_hz)
    : i_(std::move(i_samples)), q_(std::move(q_samples)), fs_(sample_rate_hz) {
    validate_signal(i_, q_, fs_);
}

IQSignal IQSignal::from_complex(std::span<const std::complex<double>> samples, double sample_rate_hz) {
    std::vector<double> i(samples.size());
    std::vector<double> q(samples.size());
    for (std::size_t n = 0; n < samples.size(); ++n) {
        i[n] = samples[n].real();
        q[n] = samples[n].imag();
    }
    return IQSignal(std::move(i), std::move(q), sample_rate_hz);
}

std::vector<std::complex<double>> IQSignal::to_complex() const {
    std::vector<std::complex<double>> out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = {i_[n], q_[n]};
    return out;
}

std::vector<double> IQSignal::magnitude() const {
    std::vector<double> out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = std::hypot(i_[n], q_[n]);
    return out;
}

std::vector<double> IQSignal::unwrapped_phase() const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> out(size());
    double offset = 0.0;
    double prev = 0.0;
    for (std::size_t n = 0; n < size(); ++n) {
        const double wrapped = std::atan2(q_[n], i_[n]);
        if (n > 0) {
            const double step = wrapped - prev;
            if (step > std::numbers::pi) offset -= two_pi;
            else if (step < -std::numbers::pi) offset += two_pi;
        }
        out[n] = wrapped + offset;
        prev = wrapped;
    }
    return out;
}

void WindowConfig::validate() const {
    if (window_len < 2) {
        throw Error(ErrorCode::BadWindowConfig, "window_len must be >= 2");
    }
    if (window_offset < 1 || window_offset > window_len) {
        throw Error(ErrorCode::BadWindowConfig, "window_offset must be in [1, window_len]");
    }
}

}  // namespace vfdt_rf
