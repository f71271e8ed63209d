#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "raman/augment.hpp"
#include "raman/dataset.hpp"
#include "raman/nn/adam.hpp"
#include "raman/nn/model.hpp"

namespace raman::nn {

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 32;
    double init_std = kDefaultInitStd;
    int early_stop_patience = 10;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
    AdamOptions adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    bool stopped_early = false;
};

struct TrainResult {
    Model model;
    TrainHistory history;
};

/// Holds out a stratified validation slice: picks round-robin from classes that keep
/// at least one training sample. Returns indices into `d`.
struct ValidationSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};
ValidationSplit validation_split(const LabeledDataset& d, double fraction, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the weighted loss with fresh augmentation every epoch. Keeps the
/// parameters of the best validation epoch (accuracy, then loss) and stops after
/// `early_stop_patience` epochs without improvement.
TrainResult train(Model model, const LabeledDataset& dataset, const TrainConfig& cfg,
                  const AugmentConfig& augment_cfg, const EpochCallback& on_epoch = {});

/// Top-1 accuracy and mean weighted loss of the model on `d` in inference mode.
struct Evaluation {
    double accuracy = 0.0;
    double loss = 0.0;
};
Evaluation evaluate(const Model& model, const LabeledDataset& d,
                    std::span<const std::size_t> class_counts);

}  // namespace raman::nn
