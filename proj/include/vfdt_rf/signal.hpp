#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vfdt_rf {

// Uniformly sampled complex baseband recording, kept as two parallel real
// streams. Construction validates; the object is immutable afterwards.
class IQSignal {
public:
    IQSignal(std::vector<double> i_samples, std::vector<double> q_samples, double sample_rate_hz);

    static IQSignal from_complex(std::span<const std::complex<double>> samples, double sample_rate_hz);

    std::span<const double> i() const noexcept { return i_; }
    std::span<const double> q() const noexcept { return q_; }
    double sample_rate_hz() const noexcept { return fs_; }
    std::size_t size() const noexcept { return i_.size(); }

    std::complex<double> operator[](std::size_t n) const { return {i_[n], q_[n]}; }
    std::vector<std::complex<double>> to_complex() const;

    // Derived real streams used by the impairment analyses.
    std::vector<double> magnitude() const;
    std::vector<double> unwrapped_phase() const;

    friend bool operator==(const IQSignal&, const IQSignal&) = default;

private:
    std::vector<double> i_;
    std::vector<double> q_;
    double fs_;
};

// Throws Error{LengthMismatch | NonFiniteSample | BadSampleRate}.
void validate_signal(std::span<const double> i_samples, std::span<const double> q_samples,
                     double sample_rate_hz);
void validate_signal(const IQSignal& sig);

struct WindowConfig {
    std::size_t window_len = 256;
    std::size_t window_offset = 64;

    void validate() const;
    friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct FractalDimension {
    double d = 0.0;
    double h = 0.0;
    int euclidean_dim = 1;

    static FractalDimension from_hurst(double hurst, int euclidean_dim = 1) {
        return {euclidean_dim + 1 - hurst, hurst, euclidean_dim};
    }
    static FractalDimension from_dimension(double dim, int euclidean_dim = 1) {
        return {dim, euclidean_dim + 1 - dim, euclidean_dim};
    }
};

}  // namespace vfdt_rf
