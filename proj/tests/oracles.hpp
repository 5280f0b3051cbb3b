#pragma once

// Reference computations that deliberately avoid the library's own code
// paths, so tests compare two independent implementations.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace oracle {

inline double mean(std::span<const double> x) {
    long double s = 0;
    for (double v : x) s += v;
    return static_cast<double>(s / x.size());
}

// Two-pass unbiased variance in long double.
inline double variance(std::span<const double> x) {
    const long double m = mean(x);
    long double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return static_cast<double>(ss / (x.size() - 1));
}

// Single-scale variance dimension computed with base-2 logarithms.
inline double dimension_log2(std::span<const double> x) {
    return 2.0 - std::log2(variance(x)) / (2.0 * std::log2(static_cast<double>(x.size())));
}

inline std::vector<double> white(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = g(gen);
    return x;
}

// Rescale to exactly the requested unbiased sample variance (up to rounding).
inline std::vector<double> with_variance(std::vector<double> x, double var) {
    const double m = mean(x);
    const double s = std::sqrt(var / variance(x));
    for (auto& v : x) v = (v - m) * s;
    return x;
}

// Fractional Brownian motion by circulant embedding of the fractional
// Gaussian noise autocovariance (Davies-Harte). Returns n samples starting at 0.
class FbmGenerator {
public:
    FbmGenerator(std::size_t n, double hurst) : n_(n), m_(2 * n), lambda_(m_) {
        auto gamma = [hurst](double k) {
            const double e = 2.0 * hurst;
            return 0.5 * (std::pow(std::abs(k + 1), e) - 2.0 * std::pow(std::abs(k), e) + std::pow(std::abs(k - 1), e));
        };
        buf_ = fftw_alloc_complex(m_);
        plan_ = fftw_plan_dft_1d(static_cast<int>(m_), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        for (std::size_t k = 0; k < m_; ++k) {
            const double lag = k <= n_ ? static_cast<double>(k) : static_cast<double>(m_ - k);
            buf_[k][0] = gamma(lag);
            buf_[k][1] = 0.0;
        }
        fftw_execute(plan_);
        for (std::size_t k = 0; k < m_; ++k) {
            if (buf_[k][0] < -1e-9) throw std::runtime_error("circulant embedding is not positive");
            lambda_[k] = std::max(0.0, buf_[k][0]);
        }
    }
    ~FbmGenerator() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    FbmGenerator(const FbmGenerator&) = delete;
    FbmGenerator& operator=(const FbmGenerator&) = delete;

    std::vector<double> operator()(std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (std::size_t k = 0; k < m_; ++k) {
            const double s = std::sqrt(lambda_[k] / (2.0 * static_cast<double>(m_)));
            buf_[k][0] = s * g(gen);
            buf_[k][1] = s * g(gen);
        }
        fftw_execute(plan_);
        std::vector<double> path(n_);
        double acc = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            path[k] = acc;
            acc += buf_[k][0] * std::sqrt(2.0);
        }
        return path;
    }

private:
    std::size_t n_, m_;
    std::vector<double> lambda_;
    fftw_complex* buf_ = nullptr;
    fftw_plan plan_ = nullptr;
};

// Amplitude of a real tone at integer bin k of an n-point record.
inline double tone_amplitude(std::span<const double> x, std::size_t k) {
    std::complex<double> acc = 0.0;
    const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) acc += x[t] * std::polar(1.0, -w * static_cast<double>(t));
    return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

}  // namespace oracle
