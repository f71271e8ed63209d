#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raman/augment.hpp"
#include "raman/baseline.hpp"
#include "raman/classic.hpp"
#include "raman/dataset.hpp"
#include "raman/nn/train.hpp"
#include "raman/ranking.hpp"

namespace raman {

enum class ClassifierKind { Cnn, Knn, Correlation, LinearSvm };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_from_name(const std::string& name);

struct MethodConfig {
    std::string name;
    ClassifierKind classifier = ClassifierKind::Knn;
    std::optional<BaselineMethod> corrector;
    bool pca = false;
    double pca_retained = 0.999;
    int knn_k = 1;
    SvmOptions svm;
    nn::TrainConfig train;
    nn::ArchSpec arch = nn::ArchSpec::pyramid();

    std::string corrector_name() const { return corrector ? corrector->name() : "none"; }
};

/// Which sample indices reached a fitting stage. Emitted before the data is consumed.
struct FitEvent {
    std::string method;
    int run = 0;
    std::string stage;  // "augment+train", "pca", "fit"
    std::vector<std::size_t> indices;
};

struct ExperimentConfig {
    std::vector<MethodConfig> methods;
    int runs = 5;
    std::vector<int> top_ks{1, 3, 5};
    std::uint64_t base_seed = 0;
    AugmentConfig augment;
    int jobs = 1;
    std::function<void(const FitEvent&)> on_fit;

    void validate() const;
};

struct TopKStat {
    int k = 1;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over runs, 0 for a single run
};

struct MethodReport {
    std::string name;
    std::string classifier;
    std::string corrector;
    std::vector<TopKStat> stats;
    std::vector<std::vector<double>> per_run;  // [run][top_k index]
    double ms_per_prediction = 0.0;
    std::optional<std::string> failure;
};

struct EvalReport {
    std::vector<int> top_ks;
    int runs = 0;
    std::uint64_t base_seed = 0;
    std::vector<MethodReport> methods;
    /// Fitting stages observed and how many of them touched a test index.
    std::size_t audited_fits = 0;
    std::size_t leakage_violations = 0;

    bool all_failed() const;
    bool any_failed() const;
};

/// Fraction of samples whose true class is among the first k ranked classes.
double top_k_accuracy(std::span<const Ranking> rankings, std::span<const std::size_t> truths,
                      int k);

/// Baseline-corrects and rescales every sample's features. Samples whose corrected
/// signal is constant become all zeros.
LabeledDataset apply_corrector(const LabeledDataset& d, const BaselineMethod& method);

/// Repeated per-class leave-one-out evaluation of every configured method.
/// A method that throws is recorded as failed; the others proceed.
EvalReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& dataset);

/// Tab-separated: method, classifier, corrector, "top-k mean±std" per k, ms/prediction.
std::string format_table(const EvalReport& report);

/// Full per-run matrix as JSON. Wall-time fields are omitted so reports are reproducible.
std::string report_to_json(const EvalReport& report);

}  // namespace raman
