#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raman/nn/layers.hpp"
#include "raman/ranking.hpp"
#include "raman/rng.hpp"
#include "raman/spectrum.hpp"

namespace raman::nn {

/// conv -> batch norm -> leaky relu -> max pool
struct ConvLayer {
    ConvShape shape;
    std::size_t pool_width = 2;
    double leaky_slope = 0.1;
    std::vector<double> kernels;
    std::vector<double> bias;
    BatchNorm norm;
};

enum class Activation { Tanh, Softmax };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;
    Activation activation = Activation::Tanh;
    /// Applied to the affine output before the activation (hidden layer only).
    std::optional<BatchNorm> norm;
};

struct ConvSpec {
    std::size_t channels = 16;
    std::size_t kernel_width = 21;
    std::size_t pool = 2;

    friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct ArchSpec {
    std::vector<ConvSpec> conv;
    std::size_t dense_units = 512;
    double dropout = 0.5;
    double leaky_slope = 0.1;

    /// (16,21,2) (32,11,2) (64,5,2) x4, dense 512, dropout 0.5.
    static ArchSpec pyramid();

    void validate() const;

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// Length after each conv block for the given input length. Throws when a block
/// input is shorter than its kernel.
std::vector<std::size_t> length_chain(std::size_t grid_points, const ArchSpec& arch);

struct Model {
    Grid grid;
    std::vector<ConvLayer> conv_layers;
    std::vector<DenseLayer> dense_layers;
    double dropout_rate = 0.5;
    std::vector<std::string> class_names;

    std::size_t grid_points() const { return grid.points; }
    std::size_t num_classes() const;
    std::size_t parameter_count() const;
    ArchSpec arch() const;

    /// Throws FormatError if layer shapes do not chain from grid_points to K.
    void validate() const;
};

inline constexpr double kDefaultInitStd = 0.22360679774997896;  // sqrt(0.05)

/// Gaussian(0, init_std^2) weights, zero biases, gamma 1, beta 0.
Model build_model(std::size_t grid_points, std::size_t num_classes, const ArchSpec& arch,
                  std::uint64_t seed, double init_std = kDefaultInitStd);

struct ConvGrads {
    std::vector<double> kernels, bias, gamma, beta;
};

struct DenseGrads {
    std::vector<double> weights, bias, gamma, beta;
};

struct ModelGradients {
    std::vector<ConvGrads> conv;
    std::vector<DenseGrads> dense;

    static ModelGradients zeros_like(const Model& model);
    void set_zero();
};

/// Every trainable tensor, in a fixed order shared by both overloads.
std::vector<std::span<double>> parameters(Model& model);
std::vector<std::span<double>> parameters(ModelGradients& grads);

struct ConvCache {
    FeatureBatch input;
    FeatureBatch pre_norm;
    BatchNormCache norm;
    FeatureBatch activated_in;  // batch-norm output, input of leaky relu
    std::vector<std::uint32_t> argmax;
};

struct DenseCache {
    FeatureBatch input;
    FeatureBatch affine;
    BatchNormCache norm;
    FeatureBatch output;           // activation output (tanh or softmax)
    std::vector<double> dropout_mask;  // empty when no dropout follows
};

/// Intermediate state of one train-mode forward pass.
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<ConvCache> conv;
    std::vector<DenseCache> dense;
    bool valid = false;
};

/// Train-mode forward over a batch of grid-length inputs (one channel). Updates batch-norm
/// running statistics. Returns batch x K probabilities (length 1).
FeatureBatch forward_train(Model& model, const FeatureBatch& input, Rng& dropout_rng,
                           ForwardCache& cache);

/// Inference-mode forward; deterministic, no state changes.
FeatureBatch forward_infer(const Model& model, const FeatureBatch& input);

/// Exact gradients of weighted_loss for the batch cached by forward_train.
/// Accumulates into grads and returns the loss. Throws InvalidArgument on a stale cache.
double backward(const Model& model, const ForwardCache& cache,
                std::span<const std::size_t> labels, std::span<const double> sample_weights,
                ModelGradients& grads);

struct Prediction {
    std::vector<double> probabilities;
    Ranking ranking;
};

Prediction predict(const Model& model, std::span<const double> features);

/// conv1d + bias + leaky relu on a single map, no normalization or pooling.
FeatureMap conv1d_forward(const FeatureMap& x, const ConvLayer& layer);

}  // namespace raman::nn
