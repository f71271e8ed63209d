#include "raman/nn/model.hpp"

#include <cmath>
#include <string>

#include "raman/error.hpp"

namespace raman::nn {

ArchSpec ArchSpec::pyramid() {
    ArchSpec a;
    a.conv = {{16, 21, 2}, {32, 11, 2}, {64, 5, 2}, {64, 5, 2}, {64, 5, 2}, {64, 5, 2}};
    a.dense_units = 512;
    a.dropout = 0.5;
    a.leaky_slope = 0.1;
    return a;
}

void ArchSpec::validate() const {
    if (conv.empty()) throw InvalidArgument("arch: need at least one conv block");
    for (std::size_t i = 0; i < conv.size(); ++i) {
        const auto& c = conv[i];
        const auto where = "arch: conv block " + std::to_string(i) + ": ";
        if (c.channels < 1) throw InvalidArgument(where + "channels must be >= 1");
        if (c.kernel_width < 1 || c.kernel_width % 2 == 0)
            throw InvalidArgument(where + "kernel width must be odd");
        if (c.pool < 1) throw InvalidArgument(where + "pool must be >= 1");
    }
    if (dense_units < 1) throw InvalidArgument("arch: dense_units must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("arch: dropout must be in [0,1)");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw InvalidArgument("arch: leaky slope must be in (0,1)");
}

std::vector<std::size_t> length_chain(std::size_t grid_points, const ArchSpec& arch) {
    std::vector<std::size_t> lengths;
    std::size_t len = grid_points;
    for (std::size_t i = 0; i < arch.conv.size(); ++i) {
        if (len < arch.conv[i].kernel_width)
            throw InvalidArgument("grid of " + std::to_string(grid_points) +
                                  " points too small for the pool chain: conv block " +
                                  std::to_string(i) + " sees length " + std::to_string(len) +
                                  " < kernel " + std::to_string(arch.conv[i].kernel_width));
        len = (len + arch.conv[i].pool - 1) / arch.conv[i].pool;
        lengths.push_back(len);
    }
    return lengths;
}

std::size_t Model::num_classes() const {
    return dense_layers.empty() ? 0 : dense_layers.back().out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& c : conv_layers)
        n += c.kernels.size() + c.bias.size() + c.norm.gamma.size() + c.norm.beta.size();
    for (const auto& d : dense_layers) {
        n += d.weights.size() + d.bias.size();
        if (d.norm) n += d.norm->gamma.size() + d.norm->beta.size();
    }
    return n;
}

ArchSpec Model::arch() const {
    ArchSpec a;
    for (const auto& c : conv_layers)
        a.conv.push_back({c.shape.out_channels, c.shape.kernel_width, c.pool_width});
    a.dense_units = dense_layers.size() > 1 ? dense_layers.front().out : 0;
    a.dropout = dropout_rate;
    a.leaky_slope = conv_layers.empty() ? 0.1 : conv_layers.front().leaky_slope;
    return a;
}

void Model::validate() const {
    const auto fail = [](const std::string& m) { throw FormatError("model: " + m); };
    grid.validate();
    if (conv_layers.empty() || dense_layers.size() != 2)
        fail("expected conv blocks followed by two dense layers");
    std::size_t channels = 1;
    std::size_t len = grid.points;
    for (std::size_t i = 0; i < conv_layers.size(); ++i) {
        const auto& c = conv_layers[i];
        const auto s = c.shape;
        const auto where = "conv " + std::to_string(i) + ": ";
        if (s.in_channels != channels) fail(where + "input channels do not chain");
        if (s.kernel_width % 2 == 0) fail(where + "kernel width must be odd");
        if (len < s.kernel_width) fail(where + "input shorter than kernel");
        if (c.kernels.size() != s.out_channels * s.in_channels * s.kernel_width)
            fail(where + "kernel tensor size");
        if (c.bias.size() != s.out_channels || c.norm.gamma.size() != s.out_channels ||
            c.norm.beta.size() != s.out_channels || c.norm.running_mean.size() != s.out_channels ||
            c.norm.running_var.size() != s.out_channels)
            fail(where + "per-channel parameter size");
        if (c.pool_width < 1) fail(where + "pool width");
        if (!(c.leaky_slope > 0.0 && c.leaky_slope < 1.0)) fail(where + "leaky slope");
        channels = s.out_channels;
        len = (len + c.pool_width - 1) / c.pool_width;
    }
    std::size_t width = channels * len;
    for (std::size_t i = 0; i < dense_layers.size(); ++i) {
        const auto& d = dense_layers[i];
        const auto where = "dense " + std::to_string(i) + ": ";
        if (d.in != width) fail(where + "input width does not chain");
        if (d.weights.size() != d.in * d.out || d.bias.size() != d.out) fail(where + "tensor size");
        const bool last = i + 1 == dense_layers.size();
        if (last != (d.activation == Activation::Softmax))
            fail(where + "only the final layer may be softmax");
        if (d.norm && (d.norm->gamma.size() != d.out || d.norm->beta.size() != d.out ||
                       d.norm->running_mean.size() != d.out || d.norm->running_var.size() != d.out))
            fail(where + "batch-norm size");
        width = d.out;
    }
    if (!class_names.empty() && class_names.size() != num_classes())
        fail("class name count does not match output width");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout rate");
}

Model build_model(std::size_t grid_points, std::size_t num_classes, const ArchSpec& arch,
                  std::uint64_t seed, double init_std) {
    arch.validate();
    if (num_classes < 1) throw InvalidArgument("build_model: need at least one class");
    if (!(init_std > 0.0)) throw InvalidArgument("build_model: init_std must be positive");
    const auto lengths = length_chain(grid_points, arch);

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, init_std);
    const auto draw = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = gauss(rng);
        return v;
    };

    Model m;
    m.grid = Grid{100.0, 1900.0, grid_points};
    m.dropout_rate = arch.dropout;
    std::size_t channels = 1;
    for (const auto& spec : arch.conv) {
        ConvLayer c;
        c.shape = {channels, spec.channels, spec.kernel_width};
        c.pool_width = spec.pool;
        c.leaky_slope = arch.leaky_slope;
        c.kernels = draw(spec.channels * channels * spec.kernel_width);
        c.bias.assign(spec.channels, 0.0);
        c.norm = BatchNorm::identity(spec.channels);
        m.conv_layers.push_back(std::move(c));
        channels = spec.channels;
    }
    const std::size_t flat = channels * lengths.back();

    DenseLayer hidden;
    hidden.in = flat;
    hidden.out = arch.dense_units;
    hidden.weights = draw(hidden.in * hidden.out);
    hidden.bias.assign(hidden.out, 0.0);
    hidden.activation = Activation::Tanh;
    hidden.norm = BatchNorm::identity(hidden.out);

    DenseLayer output;
    output.in = hidden.out;
    output.out = num_classes;
    output.weights = draw(output.in * output.out);
    output.bias.assign(output.out, 0.0);
    output.activation = Activation::Softmax;

    m.dense_layers.push_back(std::move(hidden));
    m.dense_layers.push_back(std::move(output));
    for (std::size_t k = 0; k < num_classes; ++k) m.class_names.push_back("class_" + std::to_string(k));
    return m;
}

ModelGradients ModelGradients::zeros_like(const Model& model) {
    ModelGradients g;
    for (const auto& c : model.conv_layers)
        g.conv.push_back({std::vector<double>(c.kernels.size(), 0.0),
                          std::vector<double>(c.bias.size(), 0.0),
                          std::vector<double>(c.norm.gamma.size(), 0.0),
                          std::vector<double>(c.norm.beta.size(), 0.0)});
    for (const auto& d : model.dense_layers) {
        DenseGrads dg{std::vector<double>(d.weights.size(), 0.0),
                      std::vector<double>(d.bias.size(), 0.0), {}, {}};
        if (d.norm) {
            dg.gamma.assign(d.norm->gamma.size(), 0.0);
            dg.beta.assign(d.norm->beta.size(), 0.0);
        }
        g.dense.push_back(std::move(dg));
    }
    return g;
}

void ModelGradients::set_zero() {
    for (auto p : parameters(*this)) std::fill(p.begin(), p.end(), 0.0);
}

std::vector<std::span<double>> parameters(Model& model) {
    std::vector<std::span<double>> out;
    for (auto& c : model.conv_layers) {
        out.emplace_back(c.kernels);
        out.emplace_back(c.bias);
        out.emplace_back(c.norm.gamma);
        out.emplace_back(c.norm.beta);
    }
    for (auto& d : model.dense_layers) {
        out.emplace_back(d.weights);
        out.emplace_back(d.bias);
        if (d.norm) {
            out.emplace_back(d.norm->gamma);
            out.emplace_back(d.norm->beta);
        }
    }
    return out;
}

std::vector<std::span<double>> parameters(ModelGradients& grads) {
    std::vector<std::span<double>> out;
    for (auto& c : grads.conv) {
        out.emplace_back(c.kernels);
        out.emplace_back(c.bias);
        out.emplace_back(c.gamma);
        out.emplace_back(c.beta);
    }
    for (auto& d : grads.dense) {
        out.emplace_back(d.weights);
        out.emplace_back(d.bias);
        if (!d.gamma.empty()) {
            out.emplace_back(d.gamma);
            out.emplace_back(d.beta);
        }
    }
    return out;
}

namespace {

void check_input(const Model& model, const FeatureBatch& input) {
    if (input.channels != 1 || input.length != model.grid_points())
        throw InvalidArgument("model input must be 1 x " + std::to_string(model.grid_points()) +
                              ", got " + std::to_string(input.channels) + " x " +
                              std::to_string(input.length));
    if (input.batch == 0) throw InvalidArgument("model input: empty batch");
}

FeatureBatch flatten(FeatureBatch x) {
    x.channels *= x.length;
    x.length = 1;
    return x;
}

FeatureBatch softmax_rows(const FeatureBatch& logits) {
    FeatureBatch p(logits.batch, logits.channels, 1);
    for (std::size_t n = 0; n < logits.batch; ++n) {
        const auto row = softmax(logits.sample(n));
        std::copy(row.begin(), row.end(), p.sample(n).begin());
    }
    return p;
}

}  // namespace

FeatureBatch forward_train(Model& model, const FeatureBatch& input, Rng& dropout_rng,
                           ForwardCache& cache) {
    check_input(model, input);
    cache = ForwardCache{};
    cache.batch = input.batch;
    FeatureBatch x = input;
    for (auto& layer : model.conv_layers) {
        ConvCache cc;
        cc.pre_norm = conv1d(x, layer.shape, layer.kernels, layer.bias);
        cc.input = std::move(x);
        cc.activated_in = batch_norm_forward(cc.pre_norm, layer.norm, Mode::Train, &cc.norm);
        x = maxpool(leaky_relu(cc.activated_in, layer.leaky_slope), layer.pool_width, &cc.argmax);
        cache.conv.push_back(std::move(cc));
    }
    x = flatten(std::move(x));
    for (std::size_t i = 0; i < model.dense_layers.size(); ++i) {
        auto& layer = model.dense_layers[i];
        DenseCache dc;
        dc.affine = dense(x, layer.out, layer.weights, layer.bias);
        dc.input = std::move(x);
        FeatureBatch h = layer.norm ? batch_norm_forward(dc.affine, *layer.norm, Mode::Train, &dc.norm)
                                    : dc.affine;
        if (layer.activation == Activation::Softmax) {
            dc.output = softmax_rows(h);
            x = dc.output;
        } else {
            dc.output = tanh_forward(h);
            x = dc.output;
            if (i == 0 && model.dropout_rate > 0.0) {
                x.values = dropout_forward(dc.output.values, model.dropout_rate, Mode::Train,
                                           dropout_rng, &dc.dropout_mask);
            }
        }
        cache.dense.push_back(std::move(dc));
    }
    cache.valid = true;
    return x;
}

FeatureBatch forward_infer(const Model& model, const FeatureBatch& input) {
    check_input(model, input);
    FeatureBatch x = input;
    for (const auto& layer : model.conv_layers) {
        auto z = batch_norm_infer(conv1d(x, layer.shape, layer.kernels, layer.bias), layer.norm);
        x = maxpool(leaky_relu(z, layer.leaky_slope), layer.pool_width);
    }
    x = flatten(std::move(x));
    for (const auto& layer : model.dense_layers) {
        FeatureBatch h = dense(x, layer.out, layer.weights, layer.bias);
        if (layer.norm) h = batch_norm_infer(h, *layer.norm);
        x = layer.activation == Activation::Softmax ? softmax_rows(h) : tanh_forward(h);
    }
    return x;
}

double backward(const Model& model, const ForwardCache& cache,
                std::span<const std::size_t> labels, std::span<const double> sample_weights,
                ModelGradients& grads) {
    if (!cache.valid || cache.conv.size() != model.conv_layers.size() ||
        cache.dense.size() != model.dense_layers.size())
        throw InvalidArgument("backward: no cached forward state for this model");
    if (labels.size() != cache.batch || sample_weights.size() != cache.batch)
        throw InvalidArgument("backward: labels/weights do not match the cached batch");
    if (grads.conv.size() != model.conv_layers.size() ||
        grads.dense.size() != model.dense_layers.size())
        throw InvalidArgument("backward: gradient buffers do not match the model");

    const auto& probs = cache.dense.back().output;
    const double loss = weighted_loss(probs, labels, sample_weights);
    FeatureBatch g = softmax_loss_backward(probs, labels, sample_weights);

    for (std::size_t i = model.dense_layers.size(); i-- > 0;) {
        const auto& layer = model.dense_layers[i];
        const auto& dc = cache.dense[i];
        auto& dg = grads.dense[i];
        if (layer.activation == Activation::Tanh) {
            if (!dc.dropout_mask.empty())
                for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] *= dc.dropout_mask[k];
            g = tanh_backward(dc.output, g);
            if (layer.norm) g = batch_norm_backward(g, *layer.norm, dc.norm, dg.gamma, dg.beta);
        }
        FeatureBatch dx;
        dense_backward(dc.input, layer.out, layer.weights, g, dg.weights, dg.bias, &dx);
        g = std::move(dx);
    }

    const auto& last = cache.conv.back();
    const std::size_t pooled_len =
        (last.activated_in.length + model.conv_layers.back().pool_width - 1) /
        model.conv_layers.back().pool_width;
    g.channels = model.conv_layers.back().shape.out_channels;
    g.length = pooled_len;

    for (std::size_t l = model.conv_layers.size(); l-- > 0;) {
        const auto& layer = model.conv_layers[l];
        const auto& cc = cache.conv[l];
        auto& cg = grads.conv[l];
        g = maxpool_backward(g, cc.activated_in.length, cc.argmax);
        g = leaky_relu_backward(cc.activated_in, g, layer.leaky_slope);
        g = batch_norm_backward(g, layer.norm, cc.norm, cg.gamma, cg.beta);
        FeatureBatch dx;
        conv1d_backward(cc.input, layer.shape, layer.kernels, g, cg.kernels, cg.bias,
                        l > 0 ? &dx : nullptr);
        g = std::move(dx);
    }
    return loss;
}

Prediction predict(const Model& model, std::span<const double> features) {
    if (features.size() != model.grid_points())
        throw InvalidArgument("predict: expected " + std::to_string(model.grid_points()) +
                              " features, got " + std::to_string(features.size()));
    FeatureBatch x(1, 1, features.size());
    std::copy(features.begin(), features.end(), x.values.begin());
    Prediction p;
    p.probabilities = forward_infer(model, x).values;
    p.ranking = rank_descending(p.probabilities);
    return p;
}

FeatureMap conv1d_forward(const FeatureMap& x, const ConvLayer& layer) {
    FeatureBatch b(1, x.channels, x.length);
    b.values = x.values;
    const auto y = leaky_relu(conv1d(b, layer.shape, layer.kernels, layer.bias), layer.leaky_slope);
    FeatureMap out(y.channels, y.length);
    out.values = y.values;
    return out;
}

}  // namespace raman::nn
