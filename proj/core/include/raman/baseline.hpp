#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "raman/spectrum.hpp"

namespace raman {

struct BaselineEstimate {
    std::vector<double> baseline;
    int iterations_used = 0;
    bool converged = false;
    /// Final smoother weights for the reweighted penalized estimators, empty otherwise.
    std::vector<double> weights;
};

/// Minimizes sum w_i (y_i - z_i)^2 + lambda * sum (second difference of z)^2
/// by a banded LDL^T factorization of (W + lambda D^T D). O(n).
/// Throws SingularSystem when the weights leave the system rank deficient.
std::vector<double> whittaker_smooth(std::span<const double> y, std::span<const double> w,
                                     double lambda);

struct AsymLsParams {
    double lambda = 1e5;
    double p = 0.01;
    int max_iter = 10;
};

struct AirPlsParams {
    double lambda = 1e5;
    int max_iter = 15;
};

struct ModPolyParams {
    int degree = 5;
    int max_iter = 100;
    double tol = 1e-3;
};

struct RollingBallParams {
    /// Half-width of the structuring window in samples; 0 selects len / 40.
    int radius = 0;
};

struct RubberBandParams {};

struct IrlsParams {
    double lambda1 = 1e4;
    double lambda2 = 1e6;
    int max_iter = 20;
};

struct RobustLrParams {
    double span = 0.3;
    int max_iter = 5;
};

BaselineEstimate asym_ls(std::span<const double> y, const AsymLsParams& params = {});
BaselineEstimate airpls(std::span<const double> y, const AirPlsParams& params = {});
BaselineEstimate modpoly(std::span<const double> y, const ModPolyParams& params = {});
BaselineEstimate rolling_ball(std::span<const double> y, const RollingBallParams& params = {});
BaselineEstimate rubber_band(std::span<const double> y);
BaselineEstimate irls_baseline(std::span<const double> y, const IrlsParams& params = {});
BaselineEstimate robust_local_regression(std::span<const double> y,
                                         const RobustLrParams& params = {});

/// Tagged choice of estimator with its parameters.
class BaselineMethod {
public:
    using Params = std::variant<AsymLsParams, ModPolyParams, RollingBallParams, RubberBandParams,
                                IrlsParams, RobustLrParams, AirPlsParams>;

    BaselineMethod() = default;
    BaselineMethod(Params params);  // NOLINT(google-explicit-constructor)

    const Params& params() const { return params_; }

    /// Canonical short name: asym_ls, modpoly, rolling_ball, rubber_band, irls, robust_lr, airpls.
    std::string name() const;

    /// Default-parameter method for a canonical name. Throws InvalidArgument on unknown names.
    static BaselineMethod from_name(std::string_view name);
    static const std::vector<std::string>& names();

    /// Throws InvalidArgument when a parameter is outside its legal range.
    void validate() const;

    BaselineEstimate estimate(std::span<const double> y) const;

private:
    Params params_ = AsymLsParams{};
};

/// Subtracts the estimated baseline from the intensities; axis and label unchanged.
Spectrum correct(const Spectrum& s, const BaselineMethod& method);

}  // namespace raman
