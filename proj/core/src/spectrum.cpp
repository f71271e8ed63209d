#include "raman/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "raman/error.hpp"

namespace raman {

double Grid::at(std::size_t i) const {
    if (i + 1 == points) return stop;
    return start + step() * static_cast<double>(i);
}

std::vector<double> Grid::axis() const {
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) out[i] = at(i);
    return out;
}

void Grid::validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !(start < stop))
        throw InvalidArgument("grid: start must be below stop");
    if (points < 2) throw InvalidArgument("grid: need at least 2 points");
}

void Spectrum::validate() const {
    if (wavenumbers.size() != intensities.size())
        throw InvalidArgument("spectrum: axis has " + std::to_string(wavenumbers.size()) +
                              " values but intensities have " +
                              std::to_string(intensities.size()));
    if (wavenumbers.size() < 2) throw InvalidArgument("spectrum: need at least 2 samples");
    for (std::size_t i = 0; i < wavenumbers.size(); ++i) {
        if (!std::isfinite(wavenumbers[i]))
            throw InvalidArgument("spectrum: non-finite wavenumber at index " + std::to_string(i));
        if (!std::isfinite(intensities[i]))
            throw InvalidArgument("spectrum: non-finite intensity at index " + std::to_string(i));
        if (i > 0 && !(wavenumbers[i] > wavenumbers[i - 1]))
            throw InvalidArgument("spectrum: wavenumbers not strictly increasing at index " +
                                  std::to_string(i));
    }
}

std::vector<double> resample(const Spectrum& s, const Grid& g) {
    s.validate();
    g.validate();
    const auto& xs = s.wavenumbers;
    const auto& ys = s.intensities;
    std::vector<double> out(g.points, 0.0);
    std::size_t j = 0;  // xs[j] <= x < xs[j+1] for the current grid point
    for (std::size_t i = 0; i < g.points; ++i) {
        const double x = g.at(i);
        if (x < xs.front() || x > xs.back()) continue;
        while (j + 2 < xs.size() && xs[j + 1] <= x) ++j;
        if (x == xs[j + 1]) {
            out[i] = ys[j + 1];
            continue;
        }
        const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
        out[i] = ys[j] + t * (ys[j + 1] - ys[j]);
    }
    return out;
}

std::vector<double> normalize_max(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("normalize_max: empty input");
    const double hi = *std::max_element(x.begin(), x.end());
    if (!(hi > 0.0)) throw InvalidArgument("normalize_max: degenerate spectrum (max <= 0)");
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v /= hi;
    return out;
}

std::vector<double> min_max_scale(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("min_max_scale: empty input");
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (!(range > 0.0)) throw InvalidArgument("min_max_scale: constant input");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo) / range;
    return out;
}

}  // namespace raman
