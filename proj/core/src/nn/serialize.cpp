#include "raman/nn/serialize.hpp"

#include <fstream>

#include "../binary_io.hpp"
#include "raman/error.hpp"

namespace raman::nn {

void write_model(std::ostream& out, const Model& model) {
    model.validate();
    detail::Writer w(out);
    w.magic("RMCN");
    w.u32(kModelFormatVersion);
    w.f64(model.grid.start);
    w.f64(model.grid.stop);
    w.u64(model.grid.points);
    w.u64(model.class_names.size());
    for (const auto& name : model.class_names) w.str(name);
    w.f64(model.dropout_rate);

    w.u64(model.conv_layers.size());
    for (const auto& c : model.conv_layers) {
        w.u64(c.shape.in_channels);
        w.u64(c.shape.out_channels);
        w.u64(c.shape.kernel_width);
        w.u64(c.pool_width);
        w.f64(c.leaky_slope);
    }
    w.u64(model.dense_layers.size());
    for (const auto& d : model.dense_layers) {
        w.u64(d.in);
        w.u64(d.out);
        w.u32(d.activation == Activation::Softmax ? 1 : 0);
        w.u32(d.norm ? 1 : 0);
    }

    const auto norm = [&](const BatchNorm& bn) {
        w.f64s(bn.gamma);
        w.f64s(bn.beta);
        w.f64s(bn.running_mean);
        w.f64s(bn.running_var);
    };
    for (const auto& c : model.conv_layers) {
        w.f64s(c.kernels);
        w.f64s(c.bias);
        norm(c.norm);
    }
    for (const auto& d : model.dense_layers) {
        w.f64s(d.weights);
        w.f64s(d.bias);
        if (d.norm) norm(*d.norm);
    }
    w.check();
}

Model read_model(std::istream& in) {
    detail::Reader r(in);
    r.expect_magic("RMCN", "model file");
    const auto version = r.u32();
    if (version != kModelFormatVersion)
        throw FormatError("model file: unsupported format version " + std::to_string(version));

    Model m;
    m.grid.start = r.f64();
    m.grid.stop = r.f64();
    m.grid.points = detail::Reader::bounded(r.u64());
    m.class_names.resize(detail::Reader::bounded(r.u64()));
    for (auto& name : m.class_names) name = r.str();
    m.dropout_rate = r.f64();

    m.conv_layers.resize(detail::Reader::bounded(r.u64()));
    for (auto& c : m.conv_layers) {
        c.shape.in_channels = detail::Reader::bounded(r.u64());
        c.shape.out_channels = detail::Reader::bounded(r.u64());
        c.shape.kernel_width = detail::Reader::bounded(r.u64());
        c.pool_width = detail::Reader::bounded(r.u64());
        c.leaky_slope = r.f64();
    }
    m.dense_layers.resize(detail::Reader::bounded(r.u64()));
    for (auto& d : m.dense_layers) {
        d.in = detail::Reader::bounded(r.u64());
        d.out = detail::Reader::bounded(r.u64());
        d.activation = r.u32() == 1 ? Activation::Softmax : Activation::Tanh;
        if (r.u32() == 1) d.norm = BatchNorm::identity(d.out);
    }

    const auto norm = [&](BatchNorm& bn) {
        bn.gamma = r.f64s();
        bn.beta = r.f64s();
        bn.running_mean = r.f64s();
        bn.running_var = r.f64s();
    };
    for (auto& c : m.conv_layers) {
        c.kernels = r.f64s();
        c.bias = r.f64s();
        norm(c.norm);
    }
    for (auto& d : m.dense_layers) {
        d.weights = r.f64s();
        d.bias = r.f64s();
        if (d.norm) norm(*d.norm);
    }
    try {
        m.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_model(out, model);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_model(in);
}

}  // namespace raman::nn
