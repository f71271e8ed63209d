#pragma once

// Finite-difference checks for every layer and for a small full model. Each check
// draws fresh inputs and parameters from `rng`, evaluates J = sum(probe * output)
// (or the weighted loss for the model), and returns the worst relative error
// between the analytic gradient and a central difference.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "raman/nn/layers.hpp"
#include "raman/nn/model.hpp"
#include "raman/rng.hpp"

namespace gradcheck {

// Larger steps cross leaky-ReLU and max-pool kinks too often to be useful.
inline constexpr double kStep = 1e-6;
// Gradients smaller than this are compared in absolute terms.
inline constexpr double kFloor = 1e-6;

inline void fill_normal(std::span<double> v, raman::Rng& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    for (double& x : v) x = g(rng);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Smallest gradient magnitude a central difference resolves to 1e-3 relative.
/// Evaluating J carries a few ulp of rounding, which the difference divides by 2h;
/// components below this are exact zeros in practice and are compared absolutely.
inline double resolvable(double J) {
    return std::max(kFloor, 3e4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(J), 1.0) / kStep);
}

/// Worst relative error over every entry of `values` against `analytic`.
inline double compare(const std::function<double()>& f, std::span<double> values,
                      std::span<const double> analytic) {
    const double floor = resolvable(f());
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double numeric = oracle::central_difference(f, values[i], kStep);
        worst = std::max(worst, oracle::relative_error(analytic[i], numeric, floor));
    }
    return worst;
}

inline double conv_layer(raman::Rng& rng) {
    using namespace raman::nn;
    const ConvShape shape{2, 3, 5};
    FeatureBatch x(2, 2, 9);
    std::vector<double> k(3 * 2 * 5), b(3);
    fill_normal(x.values, rng);
    fill_normal(k, rng);
    fill_normal(b, rng);
    FeatureBatch probe(2, 3, 9);
    fill_normal(probe.values, rng);
    const auto J = [&] { return dot(conv1d(x, shape, k, b).values, probe.values); };

    std::vector<double> dk(k.size(), 0.0), db(b.size(), 0.0);
    FeatureBatch dx;
    conv1d_backward(x, shape, k, probe, dk, db, &dx);
    return std::max({compare(J, k, dk), compare(J, b, db), compare(J, x.values, dx.values)});
}

inline double leaky_relu_layer(raman::Rng& rng) {
    using namespace raman::nn;
    FeatureBatch x(3, 2, 7), probe(3, 2, 7);
    fill_normal(x.values, rng);
    fill_normal(probe.values, rng);
    const auto J = [&] { return dot(leaky_relu(x, 0.1).values, probe.values); };
    const auto dx = leaky_relu_backward(x, probe, 0.1);
    return compare(J, x.values, dx.values);
}

inline double maxpool_layer(raman::Rng& rng) {
    using namespace raman::nn;
    FeatureBatch x(2, 3, 11);  // odd length exercises the replicated tail
    fill_normal(x.values, rng);
    std::vector<std::uint32_t> argmax;
    const auto y = maxpool(x, 2, &argmax);
    FeatureBatch probe(y.batch, y.channels, y.length);
    fill_normal(probe.values, rng);
    const auto J = [&] { return dot(maxpool(x, 2).values, probe.values); };
    const auto dx = maxpool_backward(probe, x.length, argmax);
    return compare(J, x.values, dx.values);
}

inline double batch_norm_layer(raman::Rng& rng) {
    using namespace raman::nn;
    FeatureBatch x(4, 3, 5), probe(4, 3, 5);
    fill_normal(x.values, rng);
    fill_normal(probe.values, rng);
    auto bn = BatchNorm::identity(3);
    fill_normal(bn.gamma, rng);
    fill_normal(bn.beta, rng);
    const auto J = [&] {
        auto scratch = bn;
        return dot(batch_norm_forward(x, scratch, Mode::Train).values, probe.values);
    };
    auto scratch = bn;
    BatchNormCache cache;
    batch_norm_forward(x, scratch, Mode::Train, &cache);
    std::vector<double> dg(3, 0.0), dbeta(3, 0.0);
    const auto dx = batch_norm_backward(probe, bn, cache, dg, dbeta);
    return std::max({compare(J, bn.gamma, dg), compare(J, bn.beta, dbeta),
                     compare(J, x.values, dx.values)});
}

inline double dense_layer(raman::Rng& rng) {
    using namespace raman::nn;
    const std::size_t in = 6, out = 4;
    FeatureBatch x(3, 2, 3);  // flattened to 6 inputs
    std::vector<double> w(out * in), b(out);
    fill_normal(x.values, rng);
    fill_normal(w, rng);
    fill_normal(b, rng);
    FeatureBatch probe(3, out, 1);
    fill_normal(probe.values, rng);
    const auto J = [&] { return dot(dense(x, out, w, b).values, probe.values); };
    std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0);
    FeatureBatch dx;
    dense_backward(x, out, w, probe, dw, db, &dx);
    return std::max({compare(J, w, dw), compare(J, b, db), compare(J, x.values, dx.values)});
}

inline double tanh_layer(raman::Rng& rng) {
    using namespace raman::nn;
    FeatureBatch x(3, 5, 1), probe(3, 5, 1);
    fill_normal(x.values, rng);
    fill_normal(probe.values, rng);
    const auto J = [&] { return dot(tanh_forward(x).values, probe.values); };
    const auto dx = tanh_backward(tanh_forward(x), probe);
    return compare(J, x.values, dx.values);
}

/// Softmax followed by the class-weighted loss, differentiated w.r.t. the logits.
inline double softmax_loss_layer(raman::Rng& rng) {
    using namespace raman::nn;
    const std::size_t B = 5, K = 4;
    FeatureBatch z(B, K, 1);
    fill_normal(z.values, rng, 3.0);
    std::uniform_int_distribution<std::size_t> label(0, K - 1);
    std::vector<std::size_t> labels(B);
    for (auto& l : labels) l = label(rng);
    std::vector<double> alpha(B);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (auto& a : alpha) a = u(rng);
    const auto probs = [&] {
        FeatureBatch p(B, K, 1);
        for (std::size_t n = 0; n < B; ++n) {
            const auto s = softmax(z.sample(n));
            std::copy(s.begin(), s.end(), p.sample(n).begin());
        }
        return p;
    };
    const auto J = [&] { return weighted_loss(probs(), labels, alpha); };
    const auto dz = softmax_loss_backward(probs(), labels, alpha);
    return compare(J, z.values, dz.values);
}

/// Two conv blocks on a 32-point grid, 3 classes, batch of 4, dropout active.
inline raman::nn::ArchSpec tiny_arch() {
    raman::nn::ArchSpec a;
    a.conv = {{4, 5, 2}, {6, 3, 2}};
    a.dense_units = 8;
    a.dropout = 0.5;
    a.leaky_slope = 0.1;
    return a;
}

inline double tiny_model(raman::Rng& rng) {
    using namespace raman::nn;
    const std::size_t B = 4, K = 3, L = 32;
    std::uniform_int_distribution<std::uint64_t> seeds;
    Model model = build_model(L, K, tiny_arch(), seeds(rng), 0.3);
    // Non-trivial batch-norm parameters so gamma/beta gradients are exercised away from 1/0.
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& c : model.conv_layers) {
        for (auto& g : c.norm.gamma) g = u(rng);
        for (auto& b : c.norm.beta) b = u(rng) - 1.0;
    }
    FeatureBatch x(B, 1, L);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : x.values) v = unit(rng);
    const std::vector<std::size_t> labels{0, 1, 2, 1};
    const std::vector<std::size_t> counts{1, 3, 2};
    const auto alpha = class_weights(labels, counts);
    const std::uint64_t dropout_seed = seeds(rng);

    const auto J = [&] {
        raman::Rng drop(dropout_seed);
        ForwardCache cache;
        return weighted_loss(forward_train(model, x, drop, cache), labels, alpha);
    };
    raman::Rng drop(dropout_seed);
    ForwardCache cache;
    forward_train(model, x, drop, cache);
    auto grads = ModelGradients::zeros_like(model);
    backward(model, cache, labels, alpha, grads);

    auto params = parameters(model);
    auto gparams = parameters(grads);
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) worst = std::max(worst, compare(J, params[t], gparams[t]));
    return worst;
}

}  // namespace gradcheck
