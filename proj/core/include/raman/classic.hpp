#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raman/ranking.hpp"

namespace raman {

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // D x M, orthonormal columns
    std::vector<double> explained_variance;
    double total_variance = 0.0;

    std::size_t input_dims() const { return static_cast<std::size_t>(mean.size()); }
    std::size_t output_dims() const { return static_cast<std::size_t>(components.cols()); }
    std::vector<double> explained_ratio() const;
};

/// Keeps the fewest leading components whose cumulative variance ratio reaches `retained`.
/// Uses the D x D covariance when D <= N, otherwise the N x N Gram matrix.
PcaModel pca_fit(const Eigen::MatrixXd& rows, double retained);

std::vector<double> pca_project(const PcaModel& m, std::span<const double> x);
Eigen::MatrixXd pca_project_rows(const PcaModel& m, const Eigen::MatrixXd& rows);
std::vector<double> pca_reconstruct(const PcaModel& m, std::span<const double> coords);

struct ReferenceLibrary {
    Eigen::MatrixXd features;  // one reference per row
    std::vector<std::size_t> labels;
    std::vector<std::string> class_names;

    std::size_t num_classes() const { return class_names.size(); }
    void validate() const;
};

/// Classes among the k nearest references come first, ordered by vote count then by
/// their closest member; remaining classes follow by closest member distance.
Ranking knn_predict(const ReferenceLibrary& lib, std::span<const double> x, int k = 1);

double pearson(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of x with every reference row.
std::vector<double> correlation_scores(const ReferenceLibrary& lib, std::span<const double> x);

/// Classes ranked by their best member's correlation, descending.
Ranking correlation_predict(const ReferenceLibrary& lib, std::span<const double> x);

struct SvmOptions {
    int epochs = 200;
    double learning_rate = 0.1;
    double reg = 1e-4;
};

/// One-vs-rest linear decision functions: scores = W x + b.
struct LinearSvm {
    Eigen::MatrixXd weights;  // K x D
    Eigen::VectorXd bias;

    std::size_t num_classes() const { return static_cast<std::size_t>(bias.size()); }
};

/// Full-batch subgradient descent on the mean L2-regularized hinge loss. Features are
/// standardized internally and the scaling is folded back into W and b.
LinearSvm linear_svm_train(const Eigen::MatrixXd& rows, std::span<const std::size_t> labels,
                           std::size_t num_classes, const SvmOptions& options = {});

std::vector<double> svm_decision(const LinearSvm& model, std::span<const double> x);
Ranking svm_predict(const LinearSvm& model, std::span<const double> x);

}  // namespace raman
