#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vfdt_rf/signal.hpp"

namespace vfdt_rf {

// Which quantity's variance enters the dimension formula.
//   AmplitudeVariance: variance of the raw samples in the window.
//   IncrementVariance: variance of the lag-1 differences in the window.
enum class VarianceMode { AmplitudeVariance, IncrementVariance };

std::string_view to_string(VarianceMode mode);
VarianceMode parse_variance_mode(std::string_view text);

// Unbiased (n - 1) sample variance, two-pass.
double sample_variance(std::span<const double> x);

// D = 2 - ln(var) / (2 ln(window_len)), with window_len = window.size().
// Throws WindowTooShort or DegenerateWindow (zero variance). D is not clamped.
FractalDimension variance_dimension(std::span<const double> window,
                                    VarianceMode mode = VarianceMode::AmplitudeVariance);

struct VFDTTrajectory {
    std::vector<double> values;
    WindowConfig config;
    VarianceMode mode = VarianceMode::AmplitudeVariance;
    std::size_t source_len = 0;
};

std::size_t trajectory_length(std::size_t source_len, const WindowConfig& cfg) noexcept;

// One dimension per complete window starting at i * window_offset; the
// trailing partial window is dropped. A degenerate window throws
// DegenerateWindowError carrying its window index.
VFDTTrajectory vfdt_trajectory(std::span<const double> stream, const WindowConfig& cfg,
                               VarianceMode mode = VarianceMode::AmplitudeVariance);

// Writes trajectory_length(stream.size(), cfg) values into `out` without
// allocating. Used by feature extraction.
void vfdt_trajectory_into(std::span<const double> stream, const WindowConfig& cfg, VarianceMode mode,
                          std::span<double> out);

// {1, 2, 4, ..., 2^floor(log2(n / 4))}.
std::vector<std::size_t> default_dyadic_lags(std::size_t window_len);

// Least-squares Hurst exponent from (lag, increment variance) pairs: half the
// slope of ln var against ln lag.
double hurst_from_variances(std::span<const std::size_t> lags, std::span<const double> variances);

// Multiscale estimate: regress ln var(x[j+k] - x[j]) on ln k over `lags`.
FractalDimension multiscale_dimension(std::span<const double> window, std::span<const std::size_t> lags);
FractalDimension multiscale_dimension(std::span<const double> window);

}  // namespace vfdt_rf
