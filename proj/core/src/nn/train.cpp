#include "raman/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "raman/error.hpp"

namespace raman::nn {

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw InvalidArgument("train: betas must be in (0,1)");
    if (!(epsilon > 0.0)) throw InvalidArgument("train: epsilon must be > 0");
    if (batch_size < 2) throw InvalidArgument("train: batch_size must be >= 2 (batch norm)");
    if (!(init_std > 0.0)) throw InvalidArgument("train: init_std must be > 0");
    if (early_stop_patience < 0) throw InvalidArgument("train: patience must be >= 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 0.5))
        throw InvalidArgument("train: validation_fraction must be in (0, 0.5)");
}

ValidationSplit validation_split(const LabeledDataset& d, double fraction, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> members(d.num_classes());
    for (std::size_t i = 0; i < d.size(); ++i) members[d.samples[i].class_index].push_back(i);
    for (auto& m : members) std::shuffle(m.begin(), m.end(), rng);
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    const auto target = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(d.size())));
    std::vector<bool> held(d.size(), false);
    std::vector<std::size_t> taken(members.size(), 0);
    std::size_t count = 0;
    bool progress = true;
    while (count < target && progress) {
        progress = false;
        for (std::size_t k : order) {
            if (count == target) break;
            if (members[k].size() - taken[k] < 2) continue;  // keep one for training
            held[members[k][taken[k]++]] = true;
            ++count;
            progress = true;
        }
    }
    ValidationSplit vs;
    for (std::size_t i = 0; i < d.size(); ++i) (held[i] ? vs.validation : vs.train).push_back(i);
    return vs;
}

Evaluation evaluate(const Model& model, const LabeledDataset& d,
                    std::span<const std::size_t> class_counts) {
    Evaluation ev;
    if (d.size() == 0) return ev;
    constexpr std::size_t chunk = 64;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < d.size(); start += chunk) {
        const std::size_t end = std::min(d.size(), start + chunk);
        FeatureBatch x(end - start, 1, d.grid.points);
        std::vector<std::size_t> labels;
        for (std::size_t i = start; i < end; ++i) {
            std::copy(d.samples[i].features.begin(), d.samples[i].features.end(),
                      x.sample(i - start).begin());
            labels.push_back(d.samples[i].class_index);
        }
        const auto probs = forward_infer(model, x);
        for (std::size_t n = 0; n < labels.size(); ++n) {
            const auto row = probs.sample(n);
            const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
            if (best == labels[n]) ++correct;
        }
        std::vector<double> alpha(labels.size(), 1.0);
        bool weighted = true;
        for (std::size_t l : labels)
            if (l >= class_counts.size() || class_counts[l] == 0) weighted = false;
        if (weighted) alpha = class_weights(labels, class_counts);
        loss_sum += weighted_loss(probs, labels, alpha) * static_cast<double>(labels.size());
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(d.size());
    ev.loss = loss_sum / static_cast<double>(d.size());
    return ev;
}

namespace {

// Batches of batch_size; a trailing single sample joins the previous batch.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0; start < n; start += size)
        out.emplace_back(start, std::min(n, start + size));
    if (out.size() > 1 && out.back().second - out.back().first < 2) {
        out[out.size() - 2].second = out.back().second;
        out.pop_back();
    }
    return out;
}

}  // namespace

TrainResult train(Model model, const LabeledDataset& dataset, const TrainConfig& cfg,
                  const AugmentConfig& augment_cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    augment_cfg.validate();
    if (dataset.size() == 0) throw InvalidArgument("train: empty dataset");
    dataset.validate();
    if (dataset.num_classes() < 2) throw InvalidArgument("train: need at least 2 classes");
    if (model.grid_points() != dataset.grid.points || model.num_classes() != dataset.num_classes())
        throw InvalidArgument("train: model shape does not match the dataset");
    model.grid = dataset.grid;
    model.class_names = dataset.class_names;

    const auto vs = validation_split(dataset, cfg.validation_fraction, mix_seed(cfg.seed, 1));
    const LabeledDataset train_set = dataset.subset(vs.train);
    const LabeledDataset val_set = dataset.subset(vs.validation);
    if (train_set.size() < 2) throw InvalidArgument("train: fewer than 2 training samples");
    const LabeledDataset& monitor = val_set.size() > 0 ? val_set : train_set;

    Rng shuffle_rng(mix_seed(cfg.seed, 2));
    Rng dropout_rng(mix_seed(cfg.seed, 3));
    auto params = parameters(model);
    AdamState state = AdamState::for_parameters(params);
    ModelGradients grads = ModelGradients::zeros_like(model);
    auto grad_views = parameters(grads);
    ForwardCache cache;

    TrainResult result{model, {}};
    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        AugmentConfig ac = augment_cfg;
        ac.seed = mix_seed(augment_cfg.seed, static_cast<std::uint64_t>(epoch));
        const LabeledDataset epoch_set = augment_dataset(train_set, ac);

        std::vector<std::size_t> order(epoch_set.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        for (const auto& [begin, end] : batch_bounds(order.size(), cfg.batch_size)) {
            FeatureBatch x(end - begin, 1, epoch_set.grid.points);
            std::vector<std::size_t> labels;
            labels.reserve(end - begin);
            for (std::size_t b = begin; b < end; ++b) {
                const auto& s = epoch_set.samples[order[b]];
                std::copy(s.features.begin(), s.features.end(), x.sample(b - begin).begin());
                labels.push_back(s.class_index);
            }
            const auto alpha = class_weights(labels, epoch_set.class_counts);
            grads.set_zero();
            forward_train(model, x, dropout_rng, cache);
            loss_sum += backward(model, cache, labels, alpha, grads) * static_cast<double>(labels.size());
            adam_step(params, grad_views, state, cfg.adam());
        }

        const auto ev = evaluate(model, monitor, train_set.class_counts);
        EpochRecord rec{epoch, loss_sum / static_cast<double>(epoch_set.size()), ev.loss, ev.accuracy};
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (ev.accuracy > best_acc || (ev.accuracy == best_acc && ev.loss < best_loss)) {
            best_acc = ev.accuracy;
            best_loss = ev.loss;
            result.model = model;
            result.history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            result.history.stopped_early = epoch < cfg.epochs;
            break;
        }
    }
    return result;
}

}  // namespace raman::nn
