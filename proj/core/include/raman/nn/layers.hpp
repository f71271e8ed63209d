#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "raman/rng.hpp"

namespace raman::nn {

enum class Mode { Train, Infer };

/// One sample's activations: channels x length, channel-major.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> values;

    FeatureMap() = default;
    FeatureMap(std::size_t c, std::size_t l, double fill = 0.0)
        : channels(c), length(l), values(c * l, fill) {}

    double& at(std::size_t c, std::size_t i) { return values[c * length + i]; }
    double at(std::size_t c, std::size_t i) const { return values[c * length + i]; }
};

/// A batch of feature maps stored sample-major: values[(n * channels + c) * length + i].
/// Dense activations use length == 1.
struct FeatureBatch {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> values;

    FeatureBatch() = default;
    FeatureBatch(std::size_t n, std::size_t c, std::size_t l, double fill = 0.0)
        : batch(n), channels(c), length(l), values(n * c * l, fill) {}

    std::span<double> row(std::size_t n, std::size_t c) {
        return {values.data() + (n * channels + c) * length, length};
    }
    std::span<const double> row(std::size_t n, std::size_t c) const {
        return {values.data() + (n * channels + c) * length, length};
    }
    std::span<double> sample(std::size_t n) {
        return {values.data() + n * channels * length, channels * length};
    }
    std::span<const double> sample(std::size_t n) const {
        return {values.data() + n * channels * length, channels * length};
    }
    bool same_shape(const FeatureBatch& o) const {
        return batch == o.batch && channels == o.channels && length == o.length;
    }
};

inline double leaky_relu(double x, double a) { return x > 0.0 ? x : a * x; }

FeatureBatch leaky_relu(const FeatureBatch& x, double a);

/// Subgradient: 1 for x > 0, a otherwise.
FeatureBatch leaky_relu_backward(const FeatureBatch& pre, const FeatureBatch& dy, double a);

/// Kernel tensor layout: kernels[(out * in_channels + in) * width + t].
struct ConvShape {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel_width = 1;
};

/// Same-length cross-correlation with zero padding plus per-channel bias.
FeatureBatch conv1d(const FeatureBatch& x, const ConvShape& shape, std::span<const double> kernels,
                    std::span<const double> bias);

/// Accumulates into dkernels/dbias; writes dx when non-null.
void conv1d_backward(const FeatureBatch& x, const ConvShape& shape,
                     std::span<const double> kernels, const FeatureBatch& dy,
                     std::span<double> dkernels, std::span<double> dbias, FeatureBatch* dx);

/// Block max over non-overlapping windows of `width`; the ragged tail block
/// behaves as if padded by replicating the last value. argmax receives input positions.
FeatureBatch maxpool(const FeatureBatch& x, std::size_t width,
                     std::vector<std::uint32_t>* argmax = nullptr);

/// Routes each output gradient to its block's argmax.
FeatureBatch maxpool_backward(const FeatureBatch& dy, std::size_t input_length,
                              std::span<const std::uint32_t> argmax);

struct BatchNorm {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;

    static BatchNorm identity(std::size_t channels);
    std::size_t channels() const { return gamma.size(); }
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormCache {
    FeatureBatch normalized;
    std::vector<double> inv_std;
};

/// Per-channel statistics over batch and length. Train mode requires batch >= 2 and
/// updates running statistics; Infer mode uses them.
FeatureBatch batch_norm_forward(const FeatureBatch& x, BatchNorm& bn, Mode mode,
                                BatchNormCache* cache = nullptr);

/// Inference-only overload; never touches running statistics.
FeatureBatch batch_norm_infer(const FeatureBatch& x, const BatchNorm& bn);

/// Train-mode backward. Accumulates into dgamma/dbeta.
FeatureBatch batch_norm_backward(const FeatureBatch& dy, const BatchNorm& bn,
                                 const BatchNormCache& cache, std::span<double> dgamma,
                                 std::span<double> dbeta);

/// y = W x + b per sample; W is out x in row-major. Input/output use length == 1.
FeatureBatch dense(const FeatureBatch& x, std::size_t out, std::span<const double> weights,
                   std::span<const double> bias);

void dense_backward(const FeatureBatch& x, std::size_t out, std::span<const double> weights,
                    const FeatureBatch& dy, std::span<double> dweights, std::span<double> dbias,
                    FeatureBatch* dx);

FeatureBatch tanh_forward(const FeatureBatch& x);
FeatureBatch tanh_backward(const FeatureBatch& y, const FeatureBatch& dy);

/// Inverted dropout. mask receives the per-unit multiplier (0 or 1 / (1 - rate)).
std::vector<double> dropout_forward(std::span<const double> x, double rate, Mode mode, Rng& rng,
                                    std::vector<double>* mask = nullptr);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> z);

/// alpha_n = (N / K) / #C_n with N = sum of counts, K = number of non-empty classes.
std::vector<double> class_weights(std::span<const std::size_t> labels,
                                  std::span<const std::size_t> class_counts);

inline constexpr double kLogFloor = 1e-12;

/// -(1/B) sum_n alpha_n ln p[n][label_n], p rows of a B x K probability batch.
double weighted_loss(const FeatureBatch& probabilities, std::span<const std::size_t> labels,
                     std::span<const double> sample_weights);

/// Convenience overload computing alpha from class counts.
double weighted_loss(const FeatureBatch& probabilities, std::span<const std::size_t> labels,
                     std::span<const std::size_t> class_counts);

/// Gradient of weighted_loss w.r.t. the softmax logits: alpha_n / B * (p_n - t_n).
FeatureBatch softmax_loss_backward(const FeatureBatch& probabilities,
                                   std::span<const std::size_t> labels,
                                   std::span<const double> sample_weights);

}  // namespace raman::nn
