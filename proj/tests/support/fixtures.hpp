#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace fixture {

/// Signal = smooth baseline + positive peaks; `peak_centers` marks where peaks sit.
struct PeakSignal {
    std::vector<double> y;
    std::vector<double> baseline;
    std::vector<double> peak_centers;
    double peak_sigma = 10.0;
};

inline double gaussian(double x, double center, double sigma) {
    const double u = (x - center) / sigma;
    return std::exp(-0.5 * u * u);
}

/// Height-1, sigma-10 Gaussian centred on a 0.001 * i slope, 500 samples.
inline PeakSignal gaussian_on_slope() {
    PeakSignal s;
    s.peak_centers = {250.0};
    for (std::size_t i = 0; i < 500; ++i) {
        const double x = static_cast<double>(i);
        s.baseline.push_back(0.001 * x);
        s.y.push_back(s.baseline.back() + gaussian(x, 250.0, s.peak_sigma));
    }
    return s;
}

/// Height-1, sigma-10 Gaussian on a gentle quadratic, 500 samples.
inline PeakSignal gaussian_on_quadratic() {
    PeakSignal s;
    s.peak_centers = {200.0};
    for (std::size_t i = 0; i < 500; ++i) {
        const double x = static_cast<double>(i);
        const double t = (x - 250.0) / 250.0;
        s.baseline.push_back(0.3 + 0.2 * t + 0.4 * t * t);
        s.y.push_back(s.baseline.back() + gaussian(x, 200.0, s.peak_sigma));
    }
    return s;
}

/// Two sigma-5, height-2 Gaussians on one full period of a unit-amplitude sine, 1024 samples.
inline PeakSignal peaks_on_sine() {
    PeakSignal s;
    s.peak_sigma = 5.0;
    s.peak_centers = {300.0, 700.0};
    for (std::size_t i = 0; i < 1024; ++i) {
        const double x = static_cast<double>(i);
        s.baseline.push_back(std::sin(2.0 * std::numbers::pi * x / 1024.0));
        s.y.push_back(s.baseline.back() + 2.0 * gaussian(x, 300.0, 5.0) + 2.0 * gaussian(x, 700.0, 5.0));
    }
    return s;
}

/// Compactly supported raised-cosine bump (half width 15) on a convex parabola, 300 samples.
inline PeakSignal bump_on_parabola() {
    PeakSignal s;
    s.peak_sigma = 5.0;  // 3 * sigma covers the support
    s.peak_centers = {120.0};
    for (std::size_t i = 0; i < 300; ++i) {
        const double x = static_cast<double>(i);
        s.baseline.push_back(2e-5 * (x - 150.0) * (x - 150.0) + 0.1);
        const double u = (x - 120.0) / 15.0;
        const double bump = std::abs(u) < 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * u)) : 0.0;
        s.y.push_back(s.baseline.back() + bump);
    }
    return s;
}

/// Largest |estimate - truth| at least `sigmas` peak sigmas from every peak centre.
inline double off_peak_error(const PeakSignal& s, std::span<const double> estimate, double sigmas = 3.0) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
        bool near = false;
        for (double c : s.peak_centers)
            near = near || std::abs(static_cast<double>(i) - c) < sigmas * s.peak_sigma;
        if (!near) worst = std::max(worst, std::abs(estimate[i] - s.baseline[i]));
    }
    return worst;
}

}  // namespace fixture
