#include "vfdt_rf/vfdt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "vfdt_rf/error.hpp"

namespace vfdt_rf {

std::string_view to_string(VarianceMode mode) {
    return mode == VarianceMode::AmplitudeVariance ? "amplitude" : "increment";
}

VarianceMode parse_variance_mode(std::string_view text) {
    if (text == "amplitude" || text == "amp") return VarianceMode::AmplitudeVariance;
    if (text == "increment" || text == "inc") return VarianceMode::IncrementVariance;
    throw Error(ErrorCode::BadArgument, "unknown variance mode '" + std::string(text) + "'");
}

double sample_variance(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / (n - 1.0);
}

namespace {

double increment_variance(std::span<const double> window) {
    const std::size_t m = window.size() - 1;
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += window[j + 1] - window[j];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double d = window[j + 1] - window[j] - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(m - 1);
}

double window_variance(std::span<const double> window, VarianceMode mode) {
    const std::size_t min_len = mode == VarianceMode::IncrementVariance ? 3 : 2;
    if (window.size() < min_len) {
        throw Error(ErrorCode::WindowTooShort, "window of " + std::to_string(window.size()) +
                                                   " samples, need >= " + std::to_string(min_len));
    }
    return mode == VarianceMode::AmplitudeVariance ? sample_variance(window) : increment_variance(window);
}

}  // namespace

FractalDimension variance_dimension(std::span<const double> window, VarianceMode mode) {
    const double var = window_variance(window, mode);
    if (!(var > 0.0)) {
        throw Error(ErrorCode::DegenerateWindow, "window variance is zero");
    }
    const double d = 2.0 - std::log(var) / (2.0 * std::log(static_cast<double>(window.size())));
    return FractalDimension::from_dimension(d);
}

std::size_t trajectory_length(std::size_t source_len, const WindowConfig& cfg) noexcept {
    if (source_len < cfg.window_len) return 0;
    return (source_len - cfg.window_len) / cfg.window_offset + 1;
}

void vfdt_trajectory_into(std::span<const double> stream, const WindowConfig& cfg, VarianceMode mode,
                          std::span<double> out) {
    cfg.validate();
    const std::size_t count = trajectory_length(stream.size(), cfg);
    if (count == 0) {
        throw Error(ErrorCode::StreamTooShort, "stream of " + std::to_string(stream.size()) +
                                                   " samples is shorter than window_len " +
                                                   std::to_string(cfg.window_len));
    }
    if (out.size() != count) {
        throw Error(ErrorCode::ShapeMismatch, "output span has wrong length");
    }
    for (std::size_t w = 0; w < count; ++w) {
        const auto window = stream.subspan(w * cfg.window_offset, cfg.window_len);
        try {
            out[w] = variance_dimension(window, mode).d;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DegenerateWindow) {
                throw DegenerateWindowError(w, "zero-variance window in trajectory");
            }
            throw;
        }
    }
}

VFDTTrajectory vfdt_trajectory(std::span<const double> stream, const WindowConfig& cfg, VarianceMode mode) {
    cfg.validate();
    VFDTTrajectory traj;
    traj.config = cfg;
    traj.mode = mode;
    traj.source_len = stream.size();
    traj.values.resize(trajectory_length(stream.size(), cfg));
    if (traj.values.empty()) {
        throw Error(ErrorCode::StreamTooShort, "stream of " + std::to_string(stream.size()) +
                                                   " samples is shorter than window_len " +
                                                   std::to_string(cfg.window_len));
    }
    vfdt_trajectory_into(stream, cfg, mode, traj.values);
    return traj;
}

std::vector<std::size_t> default_dyadic_lags(std::size_t window_len) {
    std::vector<std::size_t> lags;
    if (window_len < 4) return lags;
    const std::size_t top = std::bit_floor(window_len / 4);
    for (std::size_t k = 1; k <= top; k *= 2) lags.push_back(k);
    return lags;
}

double hurst_from_variances(std::span<const std::size_t> lags, std::span<const double> variances) {
    if (lags.size() < 2 || lags.size() != variances.size()) {
        throw Error(ErrorCode::InsufficientLags, "need >= 2 (lag, variance) pairs");
    }
    const auto n = static_cast<double>(lags.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        sx += std::log(static_cast<double>(lags[k]));
        sy += std::log(variances[k]);
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const double dx = std::log(static_cast<double>(lags[k])) - mx;
        sxy += dx * (std::log(variances[k]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorCode::InsufficientLags, "lags must contain at least two distinct values");
    }
    return 0.5 * sxy / sxx;
}

FractalDimension multiscale_dimension(std::span<const double> window, std::span<const std::size_t> lags) {
    if (lags.size() < 2) {
        throw Error(ErrorCode::InsufficientLags, "need >= 2 lags");
    }
    const std::size_t max_lag = *std::max_element(lags.begin(), lags.end());
    if (*std::min_element(lags.begin(), lags.end()) < 1) {
        throw Error(ErrorCode::InsufficientLags, "lags must be >= 1");
    }
    if (window.size() < 2 * max_lag) {
        throw Error(ErrorCode::WindowTooShort, "window needs >= 2 * max lag samples");
    }
    std::vector<double> variances;
    variances.reserve(lags.size());
    std::vector<double> inc;
    for (std::size_t k : lags) {
        inc.resize(window.size() - k);
        for (std::size_t j = 0; j + k < window.size(); ++j) inc[j] = window[j + k] - window[j];
        const double var = inc.size() >= 2 ? sample_variance(inc) : 0.0;
        if (!(var > 0.0)) {
            throw Error(ErrorCode::DegenerateWindow, "zero increment variance at lag " + std::to_string(k));
        }
        variances.push_back(var);
    }
    return FractalDimension::from_hurst(hurst_from_variances(lags, variances));
}

FractalDimension multiscale_dimension(std::span<const double> window) {
    const auto lags = default_dyadic_lags(window.size());
    return multiscale_dimension(window, lags);
}

}  // namespace vfdt_rf
