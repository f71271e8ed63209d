#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace raman::nn {

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::uint64_t step_count = 0;

    static AdamState for_parameters(std::span<const std::span<double>> params);
};

/// One bias-corrected Adam update over matching parameter and gradient tensors.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<double>> grads, AdamState& state,
               const AdamOptions& options);

}  // namespace raman::nn
