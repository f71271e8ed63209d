#include "raman/classic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "raman/error.hpp"

namespace raman {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
    return {x.data(), static_cast<Eigen::Index>(x.size())};
}

void check_dims(std::size_t got, std::size_t want, const char* who) {
    if (got != want)
        throw InvalidArgument(std::string(who) + ": expected " + std::to_string(want) +
                              " features, got " + std::to_string(got));
}

}  // namespace

std::vector<double> PcaModel::explained_ratio() const {
    std::vector<double> r(explained_variance.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = explained_variance[i] / total_variance;
    return r;
}

PcaModel pca_fit(const Eigen::MatrixXd& rows, double retained) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (n < 2) throw InvalidArgument("pca_fit: need at least 2 rows");
    if (!(retained > 0.0 && retained <= 1.0))
        throw InvalidArgument("pca_fit: retained variance must be in (0, 1]");

    PcaModel m;
    m.mean = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - m.mean.transpose();
    const double denom = static_cast<double>(n - 1);

    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors;  // D x r, descending eigenvalue order
    if (d <= n) {
        const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        eigenvalues = es.eigenvalues().reverse();
        vectors = es.eigenvectors().rowwise().reverse();
    } else {
        // Gram trick: eigenvectors u of X X' / (n-1) map to X' u / sqrt((n-1) lambda).
        const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        eigenvalues = es.eigenvalues().reverse();
        vectors = centered.transpose() * es.eigenvectors().rowwise().reverse();
    }
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) eigenvalues[i] = std::max(0.0, eigenvalues[i]);
    m.total_variance = eigenvalues.sum();
    if (!(m.total_variance > 0.0) || eigenvalues[0] <= 1e-300)
        throw InvalidArgument("pca_fit: data has zero variance");

    const double floor = eigenvalues[0] * 1e-10;
    Eigen::Index keep = 0;
    double cumulative = 0.0;
    while (keep < eigenvalues.size() && eigenvalues[keep] > floor) {
        cumulative += eigenvalues[keep];
        ++keep;
        if (cumulative / m.total_variance >= retained - 1e-12) break;
    }

    m.components.resize(d, keep);
    for (Eigen::Index k = 0; k < keep; ++k) {
        Eigen::VectorXd v = vectors.col(k);
        // Re-orthogonalize against earlier components (matters for the Gram path).
        for (Eigen::Index j = 0; j < k; ++j) v -= m.components.col(j).dot(v) * m.components.col(j);
        v.normalize();
        // Sign convention: largest-magnitude entry positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        m.components.col(k) = v;
        m.explained_variance.push_back(eigenvalues[k]);
    }
    return m;
}

std::vector<double> pca_project(const PcaModel& m, std::span<const double> x) {
    check_dims(x.size(), m.input_dims(), "pca_project");
    const Eigen::VectorXd coords = m.components.transpose() * (as_vector(x) - m.mean);
    return {coords.data(), coords.data() + coords.size()};
}

Eigen::MatrixXd pca_project_rows(const PcaModel& m, const Eigen::MatrixXd& rows) {
    check_dims(static_cast<std::size_t>(rows.cols()), m.input_dims(), "pca_project_rows");
    return (rows.rowwise() - m.mean.transpose()) * m.components;
}

std::vector<double> pca_reconstruct(const PcaModel& m, std::span<const double> coords) {
    check_dims(coords.size(), m.output_dims(), "pca_reconstruct");
    const Eigen::VectorXd x = m.mean + m.components * as_vector(coords);
    return {x.data(), x.data() + x.size()};
}

void ReferenceLibrary::validate() const {
    if (features.rows() == 0) throw InvalidArgument("reference library is empty");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw InvalidArgument("reference library: row count does not match label count");
    for (std::size_t l : labels)
        if (l >= class_names.size()) throw InvalidArgument("reference library: label out of range");
}

Ranking knn_predict(const ReferenceLibrary& lib, std::span<const double> x, int k) {
    lib.validate();
    if (k < 1) throw InvalidArgument("knn_predict: k must be >= 1");
    check_dims(x.size(), static_cast<std::size_t>(lib.features.cols()), "knn_predict");

    const Eigen::VectorXd dist =
        (lib.features.rowwise() - as_vector(x).transpose()).rowwise().squaredNorm();
    const std::size_t rows = lib.labels.size();
    const std::size_t K = lib.num_classes();

    std::vector<double> best(K, std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < rows; ++r)
        best[lib.labels[r]] = std::min(best[lib.labels[r]], dist[static_cast<Eigen::Index>(r)]);

    std::vector<std::size_t> refs(rows);
    std::iota(refs.begin(), refs.end(), std::size_t{0});
    const auto closer = [&](std::size_t a, std::size_t b) {
        const double da = dist[static_cast<Eigen::Index>(a)];
        const double db = dist[static_cast<Eigen::Index>(b)];
        if (da != db) return da < db;
        if (lib.labels[a] != lib.labels[b]) return lib.labels[a] < lib.labels[b];
        return a < b;
    };
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), rows);
    std::partial_sort(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(kk), refs.end(), closer);
    std::vector<int> votes(K, 0);
    for (std::size_t i = 0; i < kk; ++i) ++votes[lib.labels[refs[i]]];

    Ranking ranking(K);
    std::iota(ranking.begin(), ranking.end(), std::size_t{0});
    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
        if (votes[a] != votes[b]) return votes[a] > votes[b];
        return best[a] < best[b];
    });
    return ranking;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
    if (a.size() < 2) throw InvalidArgument("pearson: need at least 2 values");
    const auto va = as_vector(a);
    const auto vb = as_vector(b);
    const Eigen::VectorXd ca = va.array() - va.mean();
    const Eigen::VectorXd cb = vb.array() - vb.mean();
    const double na = ca.norm();
    const double nb = cb.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw InvalidArgument("pearson: constant vector");
    return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

std::vector<double> correlation_scores(const ReferenceLibrary& lib, std::span<const double> x) {
    lib.validate();
    check_dims(x.size(), static_cast<std::size_t>(lib.features.cols()), "correlation_predict");
    std::vector<double> scores(lib.labels.size());
    Eigen::VectorXd row;
    for (Eigen::Index r = 0; r < lib.features.rows(); ++r) {
        row = lib.features.row(r).transpose();
        scores[static_cast<std::size_t>(r)] =
            pearson(x, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
    return scores;
}

Ranking correlation_predict(const ReferenceLibrary& lib, std::span<const double> x) {
    const auto scores = correlation_scores(lib, x);
    std::vector<double> best(lib.num_classes(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < scores.size(); ++r)
        best[lib.labels[r]] = std::max(best[lib.labels[r]], scores[r]);
    return rank_descending(best);
}

LinearSvm linear_svm_train(const Eigen::MatrixXd& rows, std::span<const std::size_t> labels,
                           std::size_t num_classes, const SvmOptions& options) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (static_cast<std::size_t>(n) != labels.size())
        throw InvalidArgument("linear_svm_train: row count does not match label count");
    if (num_classes < 2) throw InvalidArgument("linear_svm_train: need at least 2 classes");
    if (options.epochs < 1 || !(options.learning_rate > 0.0) || !(options.reg >= 0.0))
        throw InvalidArgument("linear_svm_train: invalid options");
    std::set<std::size_t> distinct;
    for (std::size_t l : labels) {
        if (l >= num_classes) throw InvalidArgument("linear_svm_train: label out of range");
        distinct.insert(l);
    }
    if (distinct.size() < 2) throw InvalidArgument("linear_svm_train: single-class data");

    const Eigen::RowVectorXd mu = rows.colwise().mean();
    Eigen::RowVectorXd sd = ((rows.rowwise() - mu).array().square().colwise().sum() /
                             static_cast<double>(n)).sqrt();
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(sd[j] > 1e-12)) sd[j] = 1.0;
    const Eigen::MatrixXd Z = (rows.rowwise() - mu).array().rowwise() / sd.array();

    const auto K = static_cast<Eigen::Index>(num_classes);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(n, K, -1.0);  // one-vs-rest targets
    for (Eigen::Index i = 0; i < n; ++i) Y(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) = 1.0;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        const double eta = options.learning_rate / std::sqrt(static_cast<double>(epoch));
        const Eigen::MatrixXd scores = (Z * W.transpose()).rowwise() + b.transpose();
        // Hinge subgradient coefficient: -y where the margin is violated.
        const Eigen::MatrixXd coef =
            ((Y.array() * scores.array()) < 1.0).select(-Y, Eigen::MatrixXd::Zero(n, K));
        const Eigen::MatrixXd grad_w = coef.transpose() * Z * inv_n;
        const Eigen::VectorXd grad_b = coef.colwise().sum().transpose() * inv_n;
        // Proximal step on the L2 term keeps large reg stable.
        W = (W - eta * grad_w) / (1.0 + eta * options.reg);
        b -= eta * grad_b;
    }

    LinearSvm model;
    model.weights = W.array().rowwise() / sd.array();
    model.bias = b - model.weights * mu.transpose();
    return model;
}

std::vector<double> svm_decision(const LinearSvm& model, std::span<const double> x) {
    check_dims(x.size(), static_cast<std::size_t>(model.weights.cols()), "svm_predict");
    const Eigen::VectorXd s = model.weights * as_vector(x) + model.bias;
    return {s.data(), s.data() + s.size()};
}

Ranking svm_predict(const LinearSvm& model, std::span<const double> x) {
    return rank_descending(svm_decision(model, x));
}

}  // namespace raman
