#include "raman/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "raman/error.hpp"

namespace raman::nn {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require(bool ok, const char* msg) {
    if (!ok) throw InvalidArgument(msg);
}

// Positions p with 0 <= p + s < length.
struct Overlap {
    std::size_t begin, end;
};
Overlap overlap(std::size_t length, std::ptrdiff_t s) {
    const auto L = static_cast<std::ptrdiff_t>(length);
    return {static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -s)),
            static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(L - s, 0, L))};
}

}  // namespace

FeatureBatch leaky_relu(const FeatureBatch& x, double a) {
    FeatureBatch y = x;
    for (double& v : y.values) v = leaky_relu(v, a);
    return y;
}

FeatureBatch leaky_relu_backward(const FeatureBatch& pre, const FeatureBatch& dy, double a) {
    require(pre.same_shape(dy), "leaky_relu_backward: shape mismatch");
    FeatureBatch dx = dy;
    for (std::size_t i = 0; i < dx.values.size(); ++i)
        if (!(pre.values[i] > 0.0)) dx.values[i] *= a;
    return dx;
}

FeatureBatch conv1d(const FeatureBatch& x, const ConvShape& shape, std::span<const double> kernels,
                    std::span<const double> bias) {
    require(x.channels == shape.in_channels, "conv1d: input channel mismatch");
    require(shape.kernel_width % 2 == 1, "conv1d: kernel width must be odd");
    require(x.length >= shape.kernel_width, "conv1d: input shorter than kernel");
    require(kernels.size() == shape.out_channels * shape.in_channels * shape.kernel_width,
            "conv1d: kernel tensor size mismatch");
    require(bias.size() == shape.out_channels, "conv1d: bias size mismatch");

    const std::size_t L = x.length;
    const auto half = static_cast<std::ptrdiff_t>(shape.kernel_width / 2);
    FeatureBatch y(x.batch, shape.out_channels, L);
    for (std::size_t n = 0; n < x.batch; ++n) {
        for (std::size_t o = 0; o < shape.out_channels; ++o) {
            double* yr = y.row(n, o).data();
            std::fill(yr, yr + L, bias[o]);
            for (std::size_t i = 0; i < shape.in_channels; ++i) {
                const double* xr = x.row(n, i).data();
                const double* k = kernels.data() + (o * shape.in_channels + i) * shape.kernel_width;
                for (std::size_t t = 0; t < shape.kernel_width; ++t) {
                    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) - half;
                    const double kv = k[t];
                    const auto [b, e] = overlap(L, s);
                    const double* xs = xr + (static_cast<std::ptrdiff_t>(b) + s);
                    double* ys = yr + b;
                    for (std::size_t p = 0; p < e - b; ++p) ys[p] += kv * xs[p];
                }
            }
        }
    }
    return y;
}

void conv1d_backward(const FeatureBatch& x, const ConvShape& shape,
                     std::span<const double> kernels, const FeatureBatch& dy,
                     std::span<double> dkernels, std::span<double> dbias, FeatureBatch* dx) {
    require(dy.batch == x.batch && dy.channels == shape.out_channels && dy.length == x.length,
            "conv1d_backward: gradient shape mismatch");
    require(dkernels.size() == kernels.size() && dbias.size() == shape.out_channels,
            "conv1d_backward: gradient buffer size mismatch");
    const std::size_t L = x.length;
    const auto half = static_cast<std::ptrdiff_t>(shape.kernel_width / 2);
    if (dx) *dx = FeatureBatch(x.batch, x.channels, L);

    for (std::size_t n = 0; n < x.batch; ++n) {
        for (std::size_t o = 0; o < shape.out_channels; ++o) {
            const double* g = dy.row(n, o).data();
            double gs = 0.0;
            for (std::size_t p = 0; p < L; ++p) gs += g[p];
            dbias[o] += gs;
            for (std::size_t i = 0; i < shape.in_channels; ++i) {
                const double* xr = x.row(n, i).data();
                double* dxr = dx ? dx->row(n, i).data() : nullptr;
                const std::size_t kbase = (o * shape.in_channels + i) * shape.kernel_width;
                for (std::size_t t = 0; t < shape.kernel_width; ++t) {
                    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) - half;
                    const auto [b, e] = overlap(L, s);
                    const std::size_t shifted = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b) + s);
                    const double* xs = xr + shifted;
                    const double* gs_b = g + b;
                    double acc = 0.0;
                    for (std::size_t p = 0; p < e - b; ++p) acc += gs_b[p] * xs[p];
                    dkernels[kbase + t] += acc;
                    if (dxr) {
                        const double kv = kernels[kbase + t];
                        double* dxs = dxr + shifted;
                        for (std::size_t p = 0; p < e - b; ++p) dxs[p] += kv * gs_b[p];
                    }
                }
            }
        }
    }
}

FeatureBatch maxpool(const FeatureBatch& x, std::size_t width, std::vector<std::uint32_t>* argmax) {
    require(width >= 1, "maxpool: width must be >= 1");
    const std::size_t out_len = (x.length + width - 1) / width;
    FeatureBatch y(x.batch, x.channels, out_len);
    if (argmax) argmax->assign(x.batch * x.channels * out_len, 0);
    for (std::size_t n = 0; n < x.batch; ++n) {
        for (std::size_t c = 0; c < x.channels; ++c) {
            const auto xr = x.row(n, c);
            auto yr = y.row(n, c);
            for (std::size_t j = 0; j < out_len; ++j) {
                const std::size_t lo = j * width;
                const std::size_t hi = std::min(x.length, lo + width);
                std::size_t best = lo;
                for (std::size_t p = lo + 1; p < hi; ++p)
                    if (xr[p] > xr[best]) best = p;
                yr[j] = xr[best];
                if (argmax) (*argmax)[(n * x.channels + c) * out_len + j] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return y;
}

FeatureBatch maxpool_backward(const FeatureBatch& dy, std::size_t input_length,
                              std::span<const std::uint32_t> argmax) {
    require(argmax.size() == dy.values.size(), "maxpool_backward: argmax size mismatch");
    FeatureBatch dx(dy.batch, dy.channels, input_length);
    for (std::size_t n = 0; n < dy.batch; ++n)
        for (std::size_t c = 0; c < dy.channels; ++c) {
            const auto g = dy.row(n, c);
            auto d = dx.row(n, c);
            const std::size_t base = (n * dy.channels + c) * dy.length;
            for (std::size_t j = 0; j < dy.length; ++j) d[argmax[base + j]] += g[j];
        }
    return dx;
}

BatchNorm BatchNorm::identity(std::size_t channels) {
    return {std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
            std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

FeatureBatch batch_norm_infer(const FeatureBatch& x, const BatchNorm& bn) {
    require(x.channels == bn.channels(), "batch_norm: channel mismatch");
    FeatureBatch y = x;
    for (std::size_t c = 0; c < x.channels; ++c) {
        const double inv = 1.0 / std::sqrt(bn.running_var[c] + kBatchNormEpsilon);
        const double a = bn.gamma[c] * inv;
        const double b = bn.beta[c] - a * bn.running_mean[c];
        for (std::size_t n = 0; n < x.batch; ++n)
            for (double& v : y.row(n, c)) v = a * v + b;
    }
    return y;
}

FeatureBatch batch_norm_forward(const FeatureBatch& x, BatchNorm& bn, Mode mode,
                                BatchNormCache* cache) {
    if (mode == Mode::Infer) return batch_norm_infer(x, bn);
    require(x.channels == bn.channels(), "batch_norm: channel mismatch");
    if (x.batch < 2) throw InvalidArgument("batch_norm: train mode needs a batch of at least 2");

    const double m = static_cast<double>(x.batch * x.length);
    FeatureBatch y(x.batch, x.channels, x.length);
    FeatureBatch xhat(x.batch, x.channels, x.length);
    std::vector<double> inv_std(x.channels);
    for (std::size_t c = 0; c < x.channels; ++c) {
        double sum = 0.0;
        for (std::size_t n = 0; n < x.batch; ++n)
            for (double v : x.row(n, c)) sum += v;
        const double mean = sum / m;
        double ss = 0.0;
        for (std::size_t n = 0; n < x.batch; ++n)
            for (double v : x.row(n, c)) ss += (v - mean) * (v - mean);
        const double var = ss / m;
        const double inv = 1.0 / std::sqrt(var + kBatchNormEpsilon);
        inv_std[c] = inv;
        for (std::size_t n = 0; n < x.batch; ++n) {
            const auto xr = x.row(n, c);
            auto hr = xhat.row(n, c);
            auto yr = y.row(n, c);
            for (std::size_t i = 0; i < x.length; ++i) {
                hr[i] = (xr[i] - mean) * inv;
                yr[i] = bn.gamma[c] * hr[i] + bn.beta[c];
            }
        }
        bn.running_mean[c] = kBatchNormMomentum * bn.running_mean[c] + (1 - kBatchNormMomentum) * mean;
        bn.running_var[c] =
            kBatchNormMomentum * bn.running_var[c] + (1 - kBatchNormMomentum) * ss / (m - 1.0);
    }
    if (cache) {
        cache->normalized = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

FeatureBatch batch_norm_backward(const FeatureBatch& dy, const BatchNorm& bn,
                                 const BatchNormCache& cache, std::span<double> dgamma,
                                 std::span<double> dbeta) {
    const auto& xhat = cache.normalized;
    require(dy.same_shape(xhat), "batch_norm_backward: shape mismatch");
    const double m = static_cast<double>(dy.batch * dy.length);
    FeatureBatch dx(dy.batch, dy.channels, dy.length);
    for (std::size_t c = 0; c < dy.channels; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t n = 0; n < dy.batch; ++n) {
            const auto g = dy.row(n, c);
            const auto h = xhat.row(n, c);
            for (std::size_t i = 0; i < dy.length; ++i) {
                sum_dy += g[i];
                sum_dy_xhat += g[i] * h[i];
            }
        }
        dgamma[c] += sum_dy_xhat;
        dbeta[c] += sum_dy;
        const double k = bn.gamma[c] * cache.inv_std[c] / m;
        for (std::size_t n = 0; n < dy.batch; ++n) {
            const auto g = dy.row(n, c);
            const auto h = xhat.row(n, c);
            auto d = dx.row(n, c);
            for (std::size_t i = 0; i < dy.length; ++i)
                d[i] = k * (m * g[i] - sum_dy - h[i] * sum_dy_xhat);
        }
    }
    return dx;
}

FeatureBatch dense(const FeatureBatch& x, std::size_t out, std::span<const double> weights,
                   std::span<const double> bias) {
    const std::size_t in = x.channels * x.length;
    require(weights.size() == out * in, "dense: weight matrix size mismatch");
    require(bias.size() == out, "dense: bias size mismatch");
    FeatureBatch y(x.batch, out, 1);
    const auto xs = static_cast<Eigen::Index>(x.batch);
    Eigen::Map<const Eigen::MatrixXd> X(x.values.data(), static_cast<Eigen::Index>(in), xs);
    Eigen::Map<const RowMajorMatrix> W(weights.data(), static_cast<Eigen::Index>(out),
                                       static_cast<Eigen::Index>(in));
    Eigen::Map<const Eigen::VectorXd> b(bias.data(), static_cast<Eigen::Index>(out));
    Eigen::Map<Eigen::MatrixXd> Y(y.values.data(), static_cast<Eigen::Index>(out), xs);
    Y.noalias() = W * X;
    Y.colwise() += b;
    return y;
}

void dense_backward(const FeatureBatch& x, std::size_t out, std::span<const double> weights,
                    const FeatureBatch& dy, std::span<double> dweights, std::span<double> dbias,
                    FeatureBatch* dx) {
    const std::size_t in = x.channels * x.length;
    require(dy.batch == x.batch && dy.channels == out && dy.length == 1,
            "dense_backward: gradient shape mismatch");
    require(dweights.size() == out * in && dbias.size() == out,
            "dense_backward: gradient buffer size mismatch");
    const auto xs = static_cast<Eigen::Index>(x.batch);
    const auto in_i = static_cast<Eigen::Index>(in);
    const auto out_i = static_cast<Eigen::Index>(out);
    Eigen::Map<const Eigen::MatrixXd> X(x.values.data(), in_i, xs);
    Eigen::Map<const Eigen::MatrixXd> G(dy.values.data(), out_i, xs);
    Eigen::Map<RowMajorMatrix> dW(dweights.data(), out_i, in_i);
    Eigen::Map<Eigen::VectorXd> db(dbias.data(), out_i);
    dW.noalias() += G * X.transpose();
    db += G.rowwise().sum();
    if (dx) {
        *dx = FeatureBatch(x.batch, x.channels, x.length);
        Eigen::Map<const RowMajorMatrix> W(weights.data(), out_i, in_i);
        Eigen::Map<Eigen::MatrixXd> dX(dx->values.data(), in_i, xs);
        dX.noalias() = W.transpose() * G;
    }
}

FeatureBatch tanh_forward(const FeatureBatch& x) {
    FeatureBatch y = x;
    for (double& v : y.values) v = std::tanh(v);
    return y;
}

FeatureBatch tanh_backward(const FeatureBatch& y, const FeatureBatch& dy) {
    require(y.same_shape(dy), "tanh_backward: shape mismatch");
    FeatureBatch dx = dy;
    for (std::size_t i = 0; i < dx.values.size(); ++i)
        dx.values[i] *= 1.0 - y.values[i] * y.values[i];
    return dx;
}

std::vector<double> dropout_forward(std::span<const double> x, double rate, Mode mode, Rng& rng,
                                    std::vector<double>* mask) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout: rate must be in [0, 1)");
    std::vector<double> y(x.begin(), x.end());
    if (mode == Mode::Infer || rate == 0.0) {
        if (mask) mask->assign(x.size(), 1.0);
        return y;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - rate);
    if (mask) mask->resize(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double k = unit(rng) < rate ? 0.0 : keep_scale;
        y[i] *= k;
        if (mask) (*mask)[i] = k;
    }
    return y;
}

std::vector<double> softmax(std::span<const double> z) {
    require(!z.empty(), "softmax: empty input");
    const double hi = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) sum += (p[k] = std::exp(z[k] - hi));
    for (double& v : p) v /= sum;
    return p;
}

std::vector<double> class_weights(std::span<const std::size_t> labels,
                                  std::span<const std::size_t> class_counts) {
    double total = 0.0;
    double nonempty = 0.0;
    for (std::size_t c : class_counts) {
        total += static_cast<double>(c);
        if (c > 0) nonempty += 1.0;
    }
    std::vector<double> alpha(labels.size());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= class_counts.size() || class_counts[labels[n]] == 0)
            throw InvalidArgument("class_weights: label without a class count");
        alpha[n] = (total / nonempty) / static_cast<double>(class_counts[labels[n]]);
    }
    return alpha;
}

double weighted_loss(const FeatureBatch& probabilities, std::span<const std::size_t> labels,
                     std::span<const double> sample_weights) {
    const std::size_t K = probabilities.channels * probabilities.length;
    if (labels.size() != probabilities.batch || sample_weights.size() != probabilities.batch)
        throw InvalidArgument("weighted_loss: batch size mismatch");
    if (probabilities.batch == 0) throw InvalidArgument("weighted_loss: empty batch");
    double loss = 0.0;
    for (std::size_t n = 0; n < probabilities.batch; ++n) {
        if (labels[n] >= K) throw InvalidArgument("weighted_loss: label out of range");
        const double p = probabilities.sample(n)[labels[n]];
        loss -= sample_weights[n] * std::log(std::max(p, kLogFloor));
    }
    return loss / static_cast<double>(probabilities.batch);
}

double weighted_loss(const FeatureBatch& probabilities, std::span<const std::size_t> labels,
                     std::span<const std::size_t> class_counts) {
    const auto alpha = class_weights(labels, class_counts);
    return weighted_loss(probabilities, labels, alpha);
}

FeatureBatch softmax_loss_backward(const FeatureBatch& probabilities,
                                   std::span<const std::size_t> labels,
                                   std::span<const double> sample_weights) {
    if (labels.size() != probabilities.batch || sample_weights.size() != probabilities.batch)
        throw InvalidArgument("softmax_loss_backward: batch size mismatch");
    FeatureBatch dz = probabilities;
    const double inv_b = 1.0 / static_cast<double>(probabilities.batch);
    for (std::size_t n = 0; n < probabilities.batch; ++n) {
        auto row = dz.sample(n);
        row[labels[n]] -= 1.0;
        for (double& v : row) v *= sample_weights[n] * inv_b;
    }
    return dz;
}

}  // namespace raman::nn
