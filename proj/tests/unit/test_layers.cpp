#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "raman/error.hpp"
#include "raman/nn/adam.hpp"
#include "raman/nn/layers.hpp"

using namespace raman;
using namespace raman::nn;

namespace {

FeatureBatch single(std::vector<double> v) {
    FeatureBatch x(1, 1, v.size());
    x.values = std::move(v);
    return x;
}

ConvLayer one_channel_layer(std::vector<double> kernel, double bias, double slope = 0.1) {
    ConvLayer layer;
    layer.shape = {1, 1, kernel.size()};
    layer.kernels = std::move(kernel);
    layer.bias = {bias};
    layer.leaky_slope = slope;
    layer.norm = BatchNorm::identity(1);
    return layer;
}

FeatureMap map_of(std::vector<double> v) {
    FeatureMap m(1, v.size());
    m.values = std::move(v);
    return m;
}

}  // namespace

TEST(LeakyRelu, Branches) {
    EXPECT_EQ(leaky_relu(2.0, 0.1), 2.0);
    EXPECT_DOUBLE_EQ(leaky_relu(-2.0, 0.1), -0.2);
    EXPECT_EQ(leaky_relu(0.0, 0.3), 0.0);
}

TEST(LeakyRelu, SubgradientAtZeroIsSlope) {
    const auto dx = leaky_relu_backward(single({-1.0, 0.0, 1.0}), single({1.0, 1.0, 1.0}), 0.1);
    EXPECT_EQ(dx.values, (std::vector<double>{0.1, 0.1, 1.0}));
}

TEST(Conv1d, IdentityKernel) {
    const auto y = conv1d_forward(map_of({0.5, 2.0, 0.0, 3.0}), one_channel_layer({0, 1, 0}, 0.0));
    EXPECT_EQ(y.values, (std::vector<double>{0.5, 2.0, 0.0, 3.0}));
}

TEST(Conv1d, BoxKernelOnOnes) {
    const auto y = conv1d_forward(map_of({1, 1, 1, 1, 1}), one_channel_layer({1, 1, 1}, 0.0));
    EXPECT_EQ(y.values, (std::vector<double>{2, 3, 3, 3, 2}));
}

TEST(Conv1d, NegativeBranch) {
    const std::vector<double> x{0.1, 0.2, 0.3, 0.2, 0.1};
    const std::vector<double> k{0.5, 1.0, 0.5};
    const auto y = conv1d_forward(map_of(x), one_channel_layer(k, -10.0));
    const auto pre = oracle::correlate_same(x, k);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.values[i], 0.1 * (pre[i] - 10.0), 1e-14);
}

TEST(Conv1d, MatchesOracleMultiChannel) {
    Rng rng(12);
    const ConvShape shape{3, 2, 7};
    FeatureBatch x(2, 3, 20);
    std::vector<double> k(2 * 3 * 7), b{0.3, -0.7};
    gradcheck::fill_normal(x.values, rng);
    gradcheck::fill_normal(k, rng);
    const auto y = conv1d(x, shape, k, b);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t o = 0; o < 2; ++o) {
            std::vector<double> expect(20, b[o]);
            for (std::size_t i = 0; i < 3; ++i) {
                const std::span<const double> kern(k.data() + (o * 3 + i) * 7, 7);
                const auto part = oracle::correlate_same(x.row(n, i), kern);
                for (std::size_t t = 0; t < 20; ++t) expect[t] += part[t];
            }
            for (std::size_t t = 0; t < 20; ++t) EXPECT_NEAR(y.row(n, o)[t], expect[t], 1e-12);
        }
}

TEST(Conv1d, ShapeErrors) {
    FeatureBatch x(1, 2, 10);
    const std::vector<double> k(5), b(1);
    EXPECT_THROW(conv1d(x, ConvShape{1, 1, 5}, k, b), InvalidArgument);
    FeatureBatch shortx(1, 1, 3);
    EXPECT_THROW(conv1d(shortx, ConvShape{1, 1, 5}, k, b), InvalidArgument);
    EXPECT_THROW(conv1d(FeatureBatch(1, 1, 10), ConvShape{1, 1, 4}, std::vector<double>(4), b),
                 InvalidArgument);
}

TEST(MaxPool, Examples) {
    EXPECT_EQ(maxpool(single({1, 3, 2, 0}), 1).values, (std::vector<double>{1, 3, 2, 0}));
    EXPECT_EQ(maxpool(single({1, 3, 2, 0}), 2).values, (std::vector<double>{3, 2}));
    EXPECT_EQ(maxpool(single({5, 1, 1}), 2).values, (std::vector<double>{5, 1}));
    EXPECT_EQ(maxpool(single({5, 1, 1, 2, 9}), 3).values, (std::vector<double>{5, 9}));
}

TEST(MaxPool, BackwardRoutesToArgmaxAndConservesSum) {
    Rng rng(3);
    FeatureBatch x(3, 4, 13);
    gradcheck::fill_normal(x.values, rng);
    std::vector<std::uint32_t> argmax;
    const auto y = maxpool(x, 3, &argmax);
    FeatureBatch dy(y.batch, y.channels, y.length);
    gradcheck::fill_normal(dy.values, rng);
    const auto dx = maxpool_backward(dy, x.length, argmax);
    for (std::size_t n = 0; n < 3; ++n)
        for (std::size_t c = 0; c < 4; ++c) {
            const auto in = dx.row(n, c);
            const auto g = dy.row(n, c);
            EXPECT_NEAR(std::accumulate(in.begin(), in.end(), 0.0), std::accumulate(g.begin(), g.end(), 0.0), 1e-12);
            for (std::size_t j = 0; j < y.length; ++j) {
                const std::size_t pos = argmax[(n * 4 + c) * y.length + j];
                EXPECT_EQ(x.row(n, c)[pos], y.row(n, c)[j]);
                EXPECT_EQ(pos / 3, j);
            }
            std::size_t nonzero = 0;
            for (double v : in) nonzero += v != 0.0;
            EXPECT_LE(nonzero, y.length);
        }
}

TEST(BatchNormTest, TrainStandardizes) {
    Rng rng(4);
    FeatureBatch x(8, 2, 10);
    gradcheck::fill_normal(x.values, rng, 3.0);
    for (double& v : x.values) v += 5.0;
    auto bn = BatchNorm::identity(2);
    const auto y = batch_norm_forward(x, bn, Mode::Train);
    for (std::size_t c = 0; c < 2; ++c) {
        double s = 0, ss = 0;
        for (std::size_t n = 0; n < 8; ++n)
            for (double v : y.row(n, c)) s += v, ss += v * v;
        EXPECT_NEAR(s / 80.0, 0.0, 1e-12);
        EXPECT_NEAR(ss / 80.0, 1.0, 1e-5);
    }
}

TEST(BatchNormTest, AffineLaw) {
    Rng rng(5);
    FeatureBatch x(16, 1, 8);
    gradcheck::fill_normal(x.values, rng);
    auto bn = BatchNorm::identity(1);
    bn.gamma = {2.0};
    bn.beta = {3.0};
    const auto y = batch_norm_forward(x, bn, Mode::Train);
    double s = 0, ss = 0;
    for (double v : y.values) s += v;
    const double mean = s / static_cast<double>(y.values.size());
    for (double v : y.values) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 3.0, 1e-12);
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(y.values.size())), 2.0, 1e-4);
}

TEST(BatchNormTest, InferIdentityWithUnitStatistics) {
    auto bn = BatchNorm::identity(1);
    const auto x = single({-1.0, 0.0, 2.5});
    const auto y = batch_norm_forward(x, bn, Mode::Infer);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y.values[i], x.values[i], 1e-5 * std::abs(x.values[i]) + 1e-12);
    EXPECT_EQ(bn.running_mean, std::vector<double>{0.0});
}

TEST(BatchNormTest, RunningStatisticsMomentum) {
    auto bn = BatchNorm::identity(1);
    FeatureBatch x(2, 1, 1);
    x.values = {1.0, 3.0};
    batch_norm_forward(x, bn, Mode::Train);
    EXPECT_NEAR(bn.running_mean[0], 0.1 * 2.0, 1e-15);
    EXPECT_NEAR(bn.running_var[0], 0.9 + 0.1 * 2.0, 1e-15);  // unbiased batch variance of {1,3} is 2
}

TEST(BatchNormTest, SingleSampleTrainIsError) {
    auto bn = BatchNorm::identity(1);
    EXPECT_THROW(batch_norm_forward(single({1.0, 2.0}), bn, Mode::Train), InvalidArgument);
}

TEST(Dropout, Identities) {
    Rng rng(6);
    const std::vector<double> x{1.0, -2.0, 3.0};
    EXPECT_EQ(dropout_forward(x, 0.0, Mode::Train, rng), x);
    EXPECT_EQ(dropout_forward(x, 0.0, Mode::Infer, rng), x);
    EXPECT_EQ(dropout_forward(x, 0.7, Mode::Infer, rng), x);
    EXPECT_THROW(dropout_forward(x, 1.0, Mode::Train, rng), InvalidArgument);
}

TEST(Dropout, InvertedScalingIsUnbiased) {
    Rng rng(7);
    const std::vector<double> ones(10000, 1.0);
    std::vector<double> mask;
    const auto y = dropout_forward(ones, 0.5, Mode::Train, rng, &mask);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 10000.0;
    EXPECT_GE(mean, 0.95);
    EXPECT_LE(mean, 1.05);
    for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_TRUE(y[i] == 0.0 || y[i] == 2.0);
        EXPECT_EQ(y[i], mask[i]);
    }
}

TEST(Softmax, Examples) {
    for (double p : softmax(std::vector<double>{0, 0, 0})) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
    const auto big = softmax(std::vector<double>{1000.0, 0.0});
    EXPECT_NEAR(big[0], 1.0, 1e-15);
    EXPECT_GE(big[1], 0.0);
    EXPECT_LT(big[1], 1e-300);
    EXPECT_EQ(softmax(std::vector<double>{-4.2}), std::vector<double>{1.0});
}

TEST(Softmax, ProbabilityVectorAndShiftInvariance) {
    Rng rng(8);
    std::uniform_real_distribution<double> mag(-1000.0, 1000.0), shift(-500.0, 500.0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> z(1 + t % 12);
        for (double& v : z) v = t % 2 ? mag(rng) : mag(rng) * 1e-3;
        const auto p = softmax(z);
        double s = 0;
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
        const double c = shift(rng);
        auto zc = z;
        for (double& v : zc) v += c;
        const auto q = softmax(zc);
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-9);
    }
}

TEST(WeightedLoss, PerfectPredictionIsZero) {
    FeatureBatch p(2, 2, 1);
    p.values = {1, 0, 0, 1};
    EXPECT_EQ(weighted_loss(p, std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1, 1}), 0.0);
}

TEST(WeightedLoss, UniformBalancedIsLogK) {
    const std::size_t K = 5;
    FeatureBatch p(10, K, 1, 1.0 / K);
    std::vector<std::size_t> labels(10);
    for (std::size_t n = 0; n < 10; ++n) labels[n] = n % K;
    EXPECT_NEAR(weighted_loss(p, labels, std::vector<std::size_t>(K, 2)), std::log(5.0), 1e-14);
}

TEST(WeightedLoss, BalancedCountsReduceToCrossEntropy) {
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        const std::size_t K = 4, B = 12;
        FeatureBatch p(B, K, 1);
        std::vector<std::size_t> labels(B);
        double ce = 0.0;
        for (std::size_t n = 0; n < B; ++n) {
            std::vector<double> z(K);
            gradcheck::fill_normal(z, rng);
            const auto s = softmax(z);
            std::copy(s.begin(), s.end(), p.sample(n).begin());
            labels[n] = n % K;
            ce -= std::log(s[labels[n]]);
        }
        EXPECT_NEAR(weighted_loss(p, labels, std::vector<std::size_t>(K, 7)), ce / B, 1e-12);
    }
}

TEST(WeightedLoss, RareClassCarriesThreeTimesTheWeight) {
    const auto alpha = class_weights(std::vector<std::size_t>{0, 1, 1, 1}, std::vector<std::size_t>{1, 3});
    EXPECT_DOUBLE_EQ(alpha[0], 2.0);
    EXPECT_DOUBLE_EQ(alpha[1], 2.0 / 3.0);
    EXPECT_EQ(alpha[0], 3.0 * alpha[1]);
    EXPECT_DOUBLE_EQ(std::accumulate(alpha.begin(), alpha.end(), 0.0), 4.0);
}

TEST(WeightedLoss, LogIsClamped) {
    FeatureBatch p(1, 2, 1);
    p.values = {0.0, 1.0};
    EXPECT_NEAR(weighted_loss(p, std::vector<std::size_t>{0}, std::vector<double>{1.0}), -std::log(1e-12), 1e-9);
}

TEST(WeightedLoss, ShapeErrors) {
    FeatureBatch p(2, 2, 1, 0.5);
    EXPECT_THROW(weighted_loss(p, std::vector<std::size_t>{0}, std::vector<double>{1.0}), InvalidArgument);
    EXPECT_THROW(weighted_loss(p, std::vector<std::size_t>{0, 2}, std::vector<double>{1.0, 1.0}), InvalidArgument);
}

TEST(GradientCheck, EveryLayerAgainstFiniteDifferences) {
    Rng rng(2024);
    struct Case {
        const char* name;
        double (*check)(Rng&);
    };
    const Case cases[] = {{"conv", gradcheck::conv_layer},          {"leaky_relu", gradcheck::leaky_relu_layer},
                          {"maxpool", gradcheck::maxpool_layer},    {"batch_norm", gradcheck::batch_norm_layer},
                          {"dense", gradcheck::dense_layer},        {"tanh", gradcheck::tanh_layer},
                          {"softmax_loss", gradcheck::softmax_loss_layer}};
    for (const auto& c : cases) {
        double worst = 0.0;
        for (int draw = 0; draw < 20; ++draw) worst = std::max(worst, c.check(rng));
        RecordProperty(c.name, std::to_string(worst));
        EXPECT_LT(worst, 1e-3) << c.name;
    }
}

TEST(Adam, ZeroGradientKeepsParametersAndDecaysMoments) {
    std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
    std::vector<std::span<double>> params{p}, grads{g};
    auto state = AdamState::for_parameters(params);
    state.first_moment[0] = {0.5, 0.5};
    state.second_moment[0] = {0.25, 0.25};
    // Step with zero moments first to check p stays fixed from a clean state.
    auto clean = AdamState::for_parameters(params);
    adam_step(params, grads, clean, AdamOptions{});
    EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
    EXPECT_EQ(clean.step_count, 1u);
    adam_step(params, grads, state, AdamOptions{});
    EXPECT_DOUBLE_EQ(state.first_moment[0][0], 0.45);
    EXPECT_DOUBLE_EQ(state.second_moment[0][0], 0.25 * 0.999);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> p{0.0}, g{1.0};
    std::vector<std::span<double>> params{p}, grads{g};
    auto state = AdamState::for_parameters(params);
    const AdamOptions opt{1e-3, 0.9, 0.999, 1e-8};
    adam_step(params, grads, state, opt);
    // m_hat = 1, v_hat = 1 after bias correction.
    EXPECT_NEAR(p[0], -1e-3 / (1.0 + 1e-8), 1e-18);
}

TEST(Adam, ElementwiseLaw) {
    std::vector<double> p{0.3, 0.3, 5.0}, g(3);
    std::vector<std::span<double>> params{p}, grads{g};
    auto state = AdamState::for_parameters(params);
    Rng rng(10);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 25; ++t) {
        g[0] = g[1] = n(rng);
        g[2] = n(rng);
        adam_step(params, grads, state, AdamOptions{});
        EXPECT_EQ(p[0], p[1]);
    }
}

TEST(Adam, ShapeMismatchIsError) {
    std::vector<double> p{0.0, 1.0}, g{1.0};
    std::vector<std::span<double>> params{p}, grads{g};
    auto state = AdamState::for_parameters(params);
    EXPECT_THROW(adam_step(params, grads, state, AdamOptions{}), InvalidArgument);
}
