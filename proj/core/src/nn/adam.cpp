#include "raman/nn/adam.hpp"

#include <cmath>

#include "raman/error.hpp"

namespace raman::nn {

AdamState AdamState::for_parameters(std::span<const std::span<double>> params) {
    AdamState s;
    for (const auto& p : params) {
        s.first_moment.emplace_back(p.size(), 0.0);
        s.second_moment.emplace_back(p.size(), 0.0);
    }
    return s;
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<double>> grads, AdamState& state,
               const AdamOptions& options) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size())
        throw InvalidArgument("adam_step: parameter/gradient/state tensor counts differ");
    for (std::size_t t = 0; t < params.size(); ++t)
        if (params[t].size() != grads[t].size() || params[t].size() != state.first_moment[t].size() ||
            params[t].size() != state.second_moment[t].size())
            throw InvalidArgument("adam_step: shape mismatch in tensor " + std::to_string(t));

    ++state.step_count;
    const double step = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(options.beta1, step);
    const double bc2 = 1.0 - std::pow(options.beta2, step);
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto p = params[t];
        const auto g = grads[t];
        auto& m = state.first_moment[t];
        auto& v = state.second_moment[t];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
            v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
        }
    }
}

}  // namespace raman::nn
