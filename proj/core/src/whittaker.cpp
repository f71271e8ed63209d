#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "raman/baseline.hpp"
#include "raman/error.hpp"

namespace raman {

// (W + lambda D'D) is symmetric pentadiagonal. Factor as L D L' with unit lower L
// carrying two subdiagonals, then forward/back substitute.
std::vector<double> whittaker_smooth(std::span<const double> y, std::span<const double> w,
                                     double lambda) {
    const std::size_t n = y.size();
    if (w.size() != n)
        throw InvalidArgument("whittaker_smooth: " + std::to_string(w.size()) + " weights for " +
                              std::to_string(n) + " samples");
    if (n < 3) throw InvalidArgument("whittaker_smooth: need at least 3 samples");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("whittaker_smooth: lambda must be positive");

    std::vector<double> diag(n), off1(n, 0.0), off2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
            throw InvalidArgument("whittaker_smooth: weights must be finite and >= 0");
        diag[i] = w[i];
    }
    // D'D accumulated row by row of D = [1 -2 1].
    for (std::size_t r = 0; r + 2 < n; ++r) {
        diag[r] += lambda;
        diag[r + 1] += 4.0 * lambda;
        diag[r + 2] += lambda;
        off1[r] += -2.0 * lambda;
        off1[r + 1] += -2.0 * lambda;
        off2[r] += lambda;
    }

    const double scale = *std::max_element(diag.begin(), diag.end());
    const double pivot_floor = scale * 1e-14;
    std::vector<double> d(n), l1(n, 0.0), l2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double di = diag[i];
        if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
        if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
        if (!(di > pivot_floor))
            throw SingularSystem("whittaker_smooth: singular system (weights too sparse)");
        d[i] = di;
        if (i + 1 < n) {
            double b = off1[i];
            if (i >= 1) b -= l2[i - 1] * l1[i - 1] * d[i - 1];
            l1[i] = b / di;
        }
        if (i + 2 < n) l2[i] = off2[i] / di;
    }

    const auto solve = [&](std::vector<double> v) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= 1) v[i] -= l1[i - 1] * v[i - 1];
            if (i >= 2) v[i] -= l2[i - 2] * v[i - 2];
        }
        for (std::size_t i = 0; i < n; ++i) v[i] /= d[i];
        for (std::size_t k = n; k-- > 0;) {
            if (k + 1 < n) v[k] -= l1[k] * v[k + 1];
            if (k + 2 < n) v[k] -= l2[k] * v[k + 2];
        }
        return v;
    };

    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = w[i] * y[i];
    auto z = solve(rhs);
    // Large lambda puts the condition number near 16 lambda / min(w). Refine with
    // the residual written as W(y - z) - lambda D'(Dz), which avoids cancelling
    // lambda-sized terms when z is smooth.
    std::vector<double> r(n), dd(n - 2);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k + 2 < n; ++k) dd[k] = z[k] - 2.0 * z[k + 1] + z[k + 2];
        for (std::size_t i = 0; i < n; ++i) r[i] = w[i] * (y[i] - z[i]);
        for (std::size_t k = 0; k + 2 < n; ++k) {
            r[k] -= lambda * dd[k];
            r[k + 1] += 2.0 * lambda * dd[k];
            r[k + 2] -= lambda * dd[k];
        }
        const auto dz = solve(r);
        for (std::size_t i = 0; i < n; ++i) z[i] += dz[i];
    }
    return z;
}

}  // namespace raman
