#include "raman/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include <Eigen/Dense>

#include "raman/error.hpp"

namespace raman {
namespace {

void require_length(std::span<const double> y, std::size_t min_len, const char* who) {
    if (y.size() < min_len)
        throw InvalidArgument(std::string(who) + ": need at least " + std::to_string(min_len) +
                              " samples, got " + std::to_string(y.size()));
    for (double v : y)
        if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite sample");
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double relative_change(std::span<const double> prev, std::span<const double> next) {
    double diff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) diff += (next[i] - prev[i]) * (next[i] - prev[i]);
    const double ref = norm2(prev);
    return ref > 0.0 ? std::sqrt(diff) / ref : std::sqrt(diff);
}

// Sliding-window extremum over [i - r, i + r] truncated at the ends (monotone deque).
template <typename Better>
std::vector<double> window_extremum(std::span<const double> x, std::size_t r, Better better) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    std::deque<std::size_t> q;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + r);
        for (; next <= hi; ++next) {
            while (!q.empty() && !better(x[q.back()], x[next])) q.pop_back();
            q.push_back(next);
        }
        const std::size_t lo = i >= r ? i - r : 0;
        while (q.front() < lo) q.pop_front();
        out[i] = x[q.front()];
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t r) {
    const std::size_t n = x.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= r ? i - r : 0;
        const std::size_t hi = std::min(n - 1, i + r);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

}  // namespace

BaselineEstimate asym_ls(std::span<const double> y, const AsymLsParams& params) {
    require_length(y, 3, "asym_ls");
    if (!(params.lambda > 0.0)) throw InvalidArgument("asym_ls: lambda must be positive");
    if (!(params.p > 0.0 && params.p < 1.0)) throw InvalidArgument("asym_ls: p must be in (0,1)");
    if (params.max_iter < 1) throw InvalidArgument("asym_ls: max_iter must be >= 1");

    const std::size_t n = y.size();
    BaselineEstimate est;
    est.weights.assign(n, 1.0);
    std::vector<double> next_w(n);
    for (int it = 1; it <= params.max_iter; ++it) {
        est.baseline = whittaker_smooth(y, est.weights, params.lambda);
        est.iterations_used = it;
        for (std::size_t i = 0; i < n; ++i)
            next_w[i] = y[i] > est.baseline[i] ? params.p : 1.0 - params.p;
        if (next_w == est.weights) {
            est.converged = true;
            break;
        }
        est.weights.swap(next_w);
    }
    return est;
}

BaselineEstimate airpls(std::span<const double> y, const AirPlsParams& params) {
    require_length(y, 3, "airpls");
    if (!(params.lambda > 0.0)) throw InvalidArgument("airpls: lambda must be positive");
    if (params.max_iter < 1) throw InvalidArgument("airpls: max_iter must be >= 1");

    const std::size_t n = y.size();
    double abs_sum = 0.0;
    for (double v : y) abs_sum += std::abs(v);
    const double stop = 0.001 * abs_sum;

    BaselineEstimate est;
    est.weights.assign(n, 1.0);
    for (int it = 1; it <= params.max_iter; ++it) {
        est.baseline = whittaker_smooth(y, est.weights, params.lambda);
        est.iterations_used = it;
        double neg_sum = 0.0;
        double neg_max = -std::numeric_limits<double>::infinity();  // residual closest to 0
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - est.baseline[i];
            if (d < 0.0) {
                neg_sum -= d;
                neg_max = std::max(neg_max, d);
            }
        }
        if (neg_sum < stop || neg_sum == 0.0) {
            est.converged = true;
            break;
        }
        if (it == params.max_iter) break;
        const double t = static_cast<double>(it);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - est.baseline[i];
            est.weights[i] = d >= 0.0 ? 0.0 : std::exp(t * std::abs(d) / neg_sum);
        }
        // End anchors keep the system well posed once few residuals remain negative.
        est.weights.front() = est.weights.back() = std::exp(t * neg_max / neg_sum);
    }
    return est;
}

BaselineEstimate modpoly(std::span<const double> y, const ModPolyParams& params) {
    if (params.degree < 1) throw InvalidArgument("modpoly: degree must be >= 1");
    if (params.max_iter < 1) throw InvalidArgument("modpoly: max_iter must be >= 1");
    if (!(params.tol > 0.0)) throw InvalidArgument("modpoly: tol must be positive");
    const auto terms = static_cast<std::size_t>(params.degree) + 1;
    if (y.size() <= terms)
        throw InvalidArgument("modpoly: degree " + std::to_string(params.degree) +
                              " too high for " + std::to_string(y.size()) + " samples");
    require_length(y, terms + 1, "modpoly");

    const auto n = static_cast<Eigen::Index>(y.size());
    // Monomials in t on [-1, 1] keep the Vandermonde matrix tame.
    Eigen::MatrixXd V(n, static_cast<Eigen::Index>(terms));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = n > 1 ? -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        double p = 1.0;
        for (std::size_t k = 0; k < terms; ++k) {
            V(i, static_cast<Eigen::Index>(k)) = p;
            p *= t;
        }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    if (qr.rank() < static_cast<Eigen::Index>(terms))
        throw InvalidArgument("modpoly: ill-conditioned polynomial fit");

    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd f;
    BaselineEstimate est;
    for (int it = 1; it <= params.max_iter; ++it) {
        f = V * qr.solve(s);
        est.iterations_used = it;
        const Eigen::VectorXd next = s.cwiseMin(f);
        const double ref = s.norm();
        const double change = (next - s).norm() / (ref > 0.0 ? ref : 1.0);
        s = next;
        if (change < params.tol) {
            est.converged = true;
            break;
        }
    }
    est.baseline.assign(f.data(), f.data() + f.size());
    return est;
}

BaselineEstimate rolling_ball(std::span<const double> y, const RollingBallParams& params) {
    if (params.radius < 0) throw InvalidArgument("rolling_ball: radius must be >= 0");
    const std::size_t r = params.radius > 0 ? static_cast<std::size_t>(params.radius)
                                            : std::max<std::size_t>(1, y.size() / 40);
    if (y.size() <= 2 * r)
        throw InvalidArgument("rolling_ball: radius " + std::to_string(r) + " too large for " +
                              std::to_string(y.size()) + " samples");
    require_length(y, 2 * r + 1, "rolling_ball");

    const auto eroded = window_extremum(y, r, [](double a, double b) { return a < b; });
    const auto opened = window_extremum(std::span<const double>(eroded), r,
                                        [](double a, double b) { return a > b; });
    BaselineEstimate est;
    est.baseline = moving_average(opened, r);
    est.iterations_used = 1;
    est.converged = true;
    return est;
}

BaselineEstimate rubber_band(std::span<const double> y) {
    require_length(y, 2, "rubber_band");
    const std::size_t n = y.size();
    // Andrew's monotone chain, lower hull only.
    std::vector<std::size_t> hull;
    hull.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            const double cross = static_cast<double>(b - a) * (y[i] - y[a]) -
                                 (y[b] - y[a]) * static_cast<double>(i - a);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    BaselineEstimate est;
    est.baseline.resize(n);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const std::size_t a = hull[h];
        const std::size_t b = hull[h + 1];
        for (std::size_t i = a; i <= b; ++i) {
            const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
            est.baseline[i] = y[a] + t * (y[b] - y[a]);
        }
    }
    est.iterations_used = 1;
    est.converged = true;
    return est;
}

BaselineEstimate irls_baseline(std::span<const double> y, const IrlsParams& params) {
    require_length(y, 3, "irls");
    if (!(params.lambda1 > 0.0) || !(params.lambda2 > 0.0))
        throw InvalidArgument("irls: lambdas must be positive");
    if (params.max_iter < 1) throw InvalidArgument("irls: max_iter must be >= 1");

    const std::size_t n = y.size();
    const std::vector<double> ones(n, 1.0);
    std::vector<double> work(y.begin(), y.end());
    BaselineEstimate est;
    for (int it = 1; it <= params.max_iter; ++it) {
        const auto candidate = whittaker_smooth(work, ones, params.lambda2);
        // Clearance: twice the standard deviation of the negative residuals.
        double sum = 0.0, sum_sq = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - candidate[i];
            if (d < 0.0) {
                sum += d;
                sum_sq += d * d;
                ++count;
            }
        }
        double clearance = 0.0;
        if (count > 1) {
            const double mean = sum / static_cast<double>(count);
            clearance = 2.0 * std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean));
        }
        for (std::size_t i = 0; i < n; ++i) work[i] = std::min(y[i], candidate[i] + clearance);

        auto next = whittaker_smooth(work, ones, params.lambda1);
        est.iterations_used = it;
        const bool done = !est.baseline.empty() && relative_change(est.baseline, next) < 1e-6;
        est.baseline = std::move(next);
        if (done) {
            est.converged = true;
            break;
        }
    }
    return est;
}

BaselineEstimate robust_local_regression(std::span<const double> y, const RobustLrParams& params) {
    if (!(params.span > 0.0 && params.span <= 1.0))
        throw InvalidArgument("robust_lr: span must be in (0, 1]");
    if (params.max_iter < 0) throw InvalidArgument("robust_lr: max_iter must be >= 0");
    const std::size_t n = y.size();
    const auto window = static_cast<std::size_t>(std::lround(params.span * static_cast<double>(n)));
    if (window < 3)
        throw InvalidArgument("robust_lr: window of " + std::to_string(window) +
                              " samples is too small");
    require_length(y, 3, "robust_lr");
    const std::size_t q = std::min(window, n);

    std::vector<double> robustness(n, 1.0);
    std::vector<double> fit(n);
    BaselineEstimate est;
    for (int pass = 0; pass <= params.max_iter; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            // The q nearest samples form a contiguous block around i.
            std::size_t lo = i >= q / 2 ? i - q / 2 : 0;
            if (lo + q > n) lo = n - q;
            const std::size_t hi = lo + q - 1;
            const double reach =
                static_cast<double>(std::max(i - lo, hi - i)) + 1.0;  // strictly beyond the block
            double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t j = lo; j <= hi; ++j) {
                const double dx = static_cast<double>(j) - static_cast<double>(i);
                const double u = std::abs(dx) / reach;
                const double tri = 1.0 - u * u * u;
                const double wj = tri * tri * tri * robustness[j];
                sw += wj;
                sx += wj * dx;
                sy += wj * y[j];
                sxx += wj * dx * dx;
                sxy += wj * dx * y[j];
            }
            if (sw <= 0.0) {
                fit[i] = y[i];
                continue;
            }
            const double mx = sx / sw;
            const double my = sy / sw;
            const double vxx = sxx / sw - mx * mx;
            const double slope = vxx > 1e-12 ? (sxy / sw - mx * my) / vxx : 0.0;
            fit[i] = my - slope * mx;  // value at dx = 0
        }
        est.iterations_used = pass;
        if (pass == params.max_iter) break;

        std::vector<double> abs_res(n);
        for (std::size_t i = 0; i < n; ++i) abs_res[i] = std::abs(y[i] - fit[i]);
        double mad = median(abs_res);
        if (mad <= 1e-12) {
            const double mean_abs = std::accumulate(abs_res.begin(), abs_res.end(), 0.0) /
                                    static_cast<double>(n);
            if (mean_abs <= 1e-12) {
                est.converged = true;  // exact fit, nothing to reweight
                break;
            }
            mad = mean_abs;
        }
        const double scale = 4.0 * mad;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - fit[i];
            if (e <= 0.0) {
                robustness[i] = 1.0;
            } else {
                const double u = e / scale;
                robustness[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
            }
        }
    }
    est.baseline = fit;
    return est;
}

// --- BaselineMethod -------------------------------------------------------

BaselineMethod::BaselineMethod(Params params) : params_(std::move(params)) {}

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string BaselineMethod::name() const {
    return std::visit(overloaded{
                          [](const AsymLsParams&) { return "asym_ls"; },
                          [](const ModPolyParams&) { return "modpoly"; },
                          [](const RollingBallParams&) { return "rolling_ball"; },
                          [](const RubberBandParams&) { return "rubber_band"; },
                          [](const IrlsParams&) { return "irls"; },
                          [](const RobustLrParams&) { return "robust_lr"; },
                          [](const AirPlsParams&) { return "airpls"; },
                      },
                      params_);
}

const std::vector<std::string>& BaselineMethod::names() {
    static const std::vector<std::string> all{"asym_ls", "modpoly", "rolling_ball", "rubber_band",
                                              "irls",    "robust_lr", "airpls"};
    return all;
}

BaselineMethod BaselineMethod::from_name(std::string_view name) {
    if (name == "asym_ls") return BaselineMethod(AsymLsParams{});
    if (name == "modpoly") return BaselineMethod(ModPolyParams{});
    if (name == "rolling_ball") return BaselineMethod(RollingBallParams{});
    if (name == "rubber_band") return BaselineMethod(RubberBandParams{});
    if (name == "irls") return BaselineMethod(IrlsParams{});
    if (name == "robust_lr") return BaselineMethod(RobustLrParams{});
    if (name == "airpls") return BaselineMethod(AirPlsParams{});
    throw InvalidArgument("unknown baseline method '" + std::string(name) + "'");
}

void BaselineMethod::validate() const {
    const auto fail = [&](const std::string& msg) { throw InvalidArgument(name() + ": " + msg); };
    std::visit(overloaded{
                   [&](const AsymLsParams& p) {
                       if (!(p.lambda > 0)) fail("lambda must be > 0");
                       if (!(p.p > 0 && p.p < 1)) fail("p must be in (0,1)");
                       if (p.max_iter < 1) fail("max_iter must be >= 1");
                   },
                   [&](const ModPolyParams& p) {
                       if (p.degree < 1) fail("degree must be >= 1");
                       if (p.max_iter < 1) fail("max_iter must be >= 1");
                       if (!(p.tol > 0)) fail("tol must be > 0");
                   },
                   [&](const RollingBallParams& p) {
                       if (p.radius < 0) fail("radius must be >= 0");
                   },
                   [](const RubberBandParams&) {},
                   [&](const IrlsParams& p) {
                       if (!(p.lambda1 > 0) || !(p.lambda2 > 0)) fail("lambdas must be > 0");
                       if (p.max_iter < 1) fail("max_iter must be >= 1");
                   },
                   [&](const RobustLrParams& p) {
                       if (!(p.span > 0 && p.span <= 1)) fail("span must be in (0,1]");
                       if (p.max_iter < 0) fail("max_iter must be >= 0");
                   },
                   [&](const AirPlsParams& p) {
                       if (!(p.lambda > 0)) fail("lambda must be > 0");
                       if (p.max_iter < 1) fail("max_iter must be >= 1");
                   },
               },
               params_);
}

BaselineEstimate BaselineMethod::estimate(std::span<const double> y) const {
    return std::visit(overloaded{
                          [&](const AsymLsParams& p) { return asym_ls(y, p); },
                          [&](const ModPolyParams& p) { return modpoly(y, p); },
                          [&](const RollingBallParams& p) { return rolling_ball(y, p); },
                          [&](const RubberBandParams&) { return rubber_band(y); },
                          [&](const IrlsParams& p) { return irls_baseline(y, p); },
                          [&](const RobustLrParams& p) { return robust_local_regression(y, p); },
                          [&](const AirPlsParams& p) { return airpls(y, p); },
                      },
                      params_);
}

Spectrum correct(const Spectrum& s, const BaselineMethod& method) {
    s.validate();
    method.validate();
    const auto est = method.estimate(s.intensities);
    Spectrum out = s;
    for (std::size_t i = 0; i < out.intensities.size(); ++i) out.intensities[i] -= est.baseline[i];
    return out;
}

}  // namespace raman
