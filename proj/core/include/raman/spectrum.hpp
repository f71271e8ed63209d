#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace raman {

/// Uniform wavenumber grid. Points are start + i * step() for i in [0, points).
struct Grid {
    double start = 100.0;
    double stop = 1900.0;
    std::size_t points = 1024;

    double step() const { return (stop - start) / static_cast<double>(points - 1); }
    double at(std::size_t i) const;
    std::vector<double> axis() const;

    /// Throws InvalidArgument unless start < stop and points >= 2.
    void validate() const;

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// A measured spectrum: strictly ascending wavenumbers (cm^-1) and matching intensities.
struct Spectrum {
    std::vector<double> wavenumbers;
    std::vector<double> intensities;
    std::optional<std::string> label;

    /// Throws InvalidArgument describing the first violated invariant.
    void validate() const;
};

/// Linear interpolation of `s` onto `g`. Grid points outside the sampled range are 0.
std::vector<double> resample(const Spectrum& s, const Grid& g);

/// x / max(x). Throws InvalidArgument when max(x) <= 0.
std::vector<double> normalize_max(std::span<const double> x);

/// (x - min) / (max - min). Throws InvalidArgument for constant input.
std::vector<double> min_max_scale(std::span<const double> x);

}  // namespace raman
