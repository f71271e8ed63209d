#include "raman/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "raman/error.hpp"
#include "raman/nn/model.hpp"
#include "raman/rng.hpp"
#include "raman/spectrum.hpp"

namespace raman {

std::string to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Cnn: return "cnn";
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Correlation: return "correlation";
        case ClassifierKind::LinearSvm: return "linear_svm";
    }
    return "unknown";
}

ClassifierKind classifier_from_name(const std::string& name) {
    if (name == "cnn") return ClassifierKind::Cnn;
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "correlation") return ClassifierKind::Correlation;
    if (name == "svm" || name == "linear_svm") return ClassifierKind::LinearSvm;
    throw InvalidArgument("unknown classifier '" + name + "' (expected cnn, knn, correlation, linear_svm)");
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw InvalidArgument("experiment: no methods configured");
    if (runs < 1) throw InvalidArgument("experiment: runs must be >= 1");
    if (top_ks.empty()) throw InvalidArgument("experiment: top_ks must be nonempty");
    for (int k : top_ks)
        if (k < 1) throw InvalidArgument("experiment: every top-k must be >= 1");
    if (jobs < 1) throw InvalidArgument("experiment: jobs must be >= 1");
    augment.validate();
    for (const auto& m : methods) {
        const auto where = "method '" + m.name + "': ";
        if (m.name.empty()) throw InvalidArgument("experiment: method without a name");
        try {
            if (m.corrector) m.corrector->validate();
            if (m.classifier == ClassifierKind::Cnn) {
                m.train.validate();
                m.arch.validate();
            }
            if (m.knn_k < 1) throw InvalidArgument("knn k must be >= 1");
            if (!(m.pca_retained > 0.0 && m.pca_retained <= 1.0))
                throw InvalidArgument("pca_retained must be in (0, 1]");
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where + e.what());
        }
    }
}

bool EvalReport::all_failed() const {
    return std::all_of(methods.begin(), methods.end(), [](const auto& m) { return m.failure.has_value(); });
}

bool EvalReport::any_failed() const {
    return std::any_of(methods.begin(), methods.end(), [](const auto& m) { return m.failure.has_value(); });
}

double top_k_accuracy(std::span<const Ranking> rankings, std::span<const std::size_t> truths, int k) {
    if (rankings.empty()) throw InvalidArgument("top_k_accuracy: empty input");
    if (rankings.size() != truths.size()) throw InvalidArgument("top_k_accuracy: length mismatch");
    if (k < 1) throw InvalidArgument("top_k_accuracy: k must be >= 1");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        const auto& r = rankings[i];
        const auto end = r.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(r.size(), static_cast<std::size_t>(k)));
        if (std::find(r.begin(), end, truths[i]) != end) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

LabeledDataset apply_corrector(const LabeledDataset& d, const BaselineMethod& method) {
    LabeledDataset out = d;
    for (auto& s : out.samples) {
        const auto est = method.estimate(s.features);
        std::vector<double> corrected(s.features.size());
        for (std::size_t i = 0; i < corrected.size(); ++i) corrected[i] = s.features[i] - est.baseline[i];
        const auto [lo, hi] = std::minmax_element(corrected.begin(), corrected.end());
        if (*hi > *lo)
            s.features = min_max_scale(corrected);
        else
            s.features.assign(corrected.size(), 0.0);
    }
    return out;
}

namespace {

Eigen::MatrixXd to_matrix(const LabeledDataset& d) {
    const auto rows = static_cast<Eigen::Index>(d.size());
    const auto cols = static_cast<Eigen::Index>(d.grid.points);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        m.row(r) = Eigen::Map<const Eigen::RowVectorXd>(d.samples[static_cast<std::size_t>(r)].features.data(), cols);
    return m;
}

std::vector<std::size_t> labels_of(const LabeledDataset& d) {
    std::vector<std::size_t> out;
    out.reserve(d.size());
    for (const auto& s : d.samples) out.push_back(s.class_index);
    return out;
}

struct RunOutcome {
    std::vector<double> accuracies;  // per top_k
    double predict_seconds = 0.0;
    std::size_t predictions = 0;
};

class Auditor {
public:
    Auditor(const ExperimentConfig& cfg, const std::vector<Split>& splits) : cfg_(cfg) {
        for (const auto& s : splits) test_sets_.emplace_back(s.test_indices.begin(), s.test_indices.end());
    }

    void emit(const std::string& method, int run, const std::string& stage,
              const std::vector<std::size_t>& indices) {
        const auto& test = test_sets_[static_cast<std::size_t>(run)];
        const bool leaked = std::any_of(indices.begin(), indices.end(),
                                        [&](std::size_t i) { return test.count(i) > 0; });
        std::lock_guard lock(mu_);
        ++fits_;
        if (leaked) ++violations_;
        if (cfg_.on_fit) cfg_.on_fit(FitEvent{method, run, stage, indices});
    }

    std::size_t fits() const { return fits_; }
    std::size_t violations() const { return violations_; }

private:
    const ExperimentConfig& cfg_;
    std::vector<std::set<std::size_t>> test_sets_;
    std::mutex mu_;
    std::size_t fits_ = 0;
    std::size_t violations_ = 0;
};

RunOutcome run_method(const ExperimentConfig& cfg, const MethodConfig& m, const LabeledDataset& data,
                      const Split& split, int run, Auditor& audit) {
    const LabeledDataset train = data.subset(split.train_indices);
    const LabeledDataset test = data.subset(split.test_indices);
    const auto truths = labels_of(test);
    const std::uint64_t run_seed = cfg.base_seed + static_cast<std::uint64_t>(run);

    std::vector<Ranking> rankings;
    rankings.reserve(test.size());
    double seconds = 0.0;
    using Clock = std::chrono::steady_clock;

    if (m.classifier == ClassifierKind::Cnn) {
        audit.emit(m.name, run, "augment+train", split.train_indices);
        nn::TrainConfig tc = m.train;
        tc.seed = mix_seed(run_seed, m.train.seed);
        AugmentConfig ac = cfg.augment;
        ac.seed = mix_seed(run_seed, cfg.augment.seed ^ 0xA06A06ull);
        auto model = nn::build_model(data.grid.points, data.num_classes(), m.arch,
                                     mix_seed(tc.seed, 0xB011D), tc.init_std);
        model.grid = data.grid;
        model.class_names = data.class_names;
        auto result = nn::train(std::move(model), train, tc, ac);
        const auto t0 = Clock::now();
        for (const auto& s : test.samples) rankings.push_back(nn::predict(result.model, s.features).ranking);
        seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    } else {
        Eigen::MatrixXd train_rows = to_matrix(train);
        Eigen::MatrixXd test_rows = to_matrix(test);
        if (m.pca) {
            audit.emit(m.name, run, "pca", split.train_indices);
            const auto pca = pca_fit(train_rows, m.pca_retained);
            train_rows = pca_project_rows(pca, train_rows);
            test_rows = pca_project_rows(pca, test_rows);
        }
        audit.emit(m.name, run, "fit", split.train_indices);
        const auto train_labels = labels_of(train);
        ReferenceLibrary lib{train_rows, train_labels, data.class_names};
        LinearSvm svm;
        if (m.classifier == ClassifierKind::LinearSvm)
            svm = linear_svm_train(train_rows, train_labels, data.num_classes(), m.svm);

        const auto t0 = Clock::now();
        Eigen::VectorXd x;
        for (Eigen::Index r = 0; r < test_rows.rows(); ++r) {
            x = test_rows.row(r).transpose();
            const std::span<const double> q(x.data(), static_cast<std::size_t>(x.size()));
            switch (m.classifier) {
                case ClassifierKind::Knn: rankings.push_back(knn_predict(lib, q, m.knn_k)); break;
                case ClassifierKind::Correlation: rankings.push_back(correlation_predict(lib, q)); break;
                case ClassifierKind::LinearSvm: rankings.push_back(svm_predict(svm, q)); break;
                case ClassifierKind::Cnn: break;
            }
        }
        seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    }

    RunOutcome out;
    for (int k : cfg.top_ks) out.accuracies.push_back(top_k_accuracy(rankings, truths, k));
    out.predict_seconds = seconds;
    out.predictions = rankings.size();
    return out;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& dataset) {
    cfg.validate();
    dataset.validate();
    if (dataset.size() == 0) throw InvalidArgument("empty dataset");

    std::vector<Split> splits;
    for (int r = 0; r < cfg.runs; ++r) {
        splits.push_back(loo_split(dataset, cfg.base_seed + static_cast<std::uint64_t>(r)));
        if (splits.back().test_indices.empty())
            throw InvalidArgument("dataset has no class with at least two samples");
    }
    Auditor audit(cfg, splits);

    const std::size_t M = cfg.methods.size();
    const auto R = static_cast<std::size_t>(cfg.runs);
    std::vector<LabeledDataset> prepared(M);
    std::vector<std::optional<std::string>> failures(M);
    std::vector<std::optional<RunOutcome>> outcomes(M * R);
    std::mutex fail_mu;
    const auto record_failure = [&](std::size_t m, const std::string& what) {
        std::lock_guard lock(fail_mu);
        if (!failures[m]) failures[m] = what;
    };

    // Correction is per-sample and fits nothing, so it runs once on the whole dataset.
    for (std::size_t m = 0; m < M; ++m) {
        try {
            const auto& mc = cfg.methods[m];
            prepared[m] = mc.corrector ? apply_corrector(dataset, *mc.corrector) : dataset;
        } catch (const std::exception& e) {
            failures[m] = std::string("baseline correction: ") + e.what();
        }
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t task = next++; task < M * R; task = next++) {
            const std::size_t m = task / R;
            const int r = static_cast<int>(task % R);
            {
                std::lock_guard lock(fail_mu);
                if (failures[m]) continue;
            }
            try {
                outcomes[task] = run_method(cfg, cfg.methods[m], prepared[m],
                                            splits[static_cast<std::size_t>(r)], r, audit);
            } catch (const std::exception& e) {
                record_failure(m, "run " + std::to_string(r) + ": " + e.what());
            }
        }
    };
    const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), M * R);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    EvalReport report;
    report.top_ks = cfg.top_ks;
    report.runs = cfg.runs;
    report.base_seed = cfg.base_seed;
    report.audited_fits = audit.fits();
    report.leakage_violations = audit.violations();
    for (std::size_t m = 0; m < M; ++m) {
        const auto& mc = cfg.methods[m];
        MethodReport mr;
        mr.name = mc.name;
        mr.classifier = to_string(mc.classifier);
        mr.corrector = mc.corrector_name();
        mr.failure = failures[m];
        if (!mr.failure) {
            double seconds = 0.0;
            std::size_t predictions = 0;
            for (std::size_t r = 0; r < R; ++r) {
                const auto& o = *outcomes[m * R + r];
                mr.per_run.push_back(o.accuracies);
                seconds += o.predict_seconds;
                predictions += o.predictions;
            }
            for (std::size_t ki = 0; ki < cfg.top_ks.size(); ++ki) {
                TopKStat st;
                st.k = cfg.top_ks[ki];
                for (const auto& row : mr.per_run) st.mean += row[ki];
                st.mean /= static_cast<double>(R);
                if (R > 1) {
                    double ss = 0.0;
                    for (const auto& row : mr.per_run) ss += (row[ki] - st.mean) * (row[ki] - st.mean);
                    st.stddev = std::sqrt(ss / static_cast<double>(R - 1));
                }
                mr.stats.push_back(st);
            }
            mr.ms_per_prediction = predictions ? 1000.0 * seconds / static_cast<double>(predictions) : 0.0;
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

std::string format_table(const EvalReport& report) {
    std::string out = "method\tclassifier\tcorrector";
    for (int k : report.top_ks) out += "\ttop" + std::to_string(k) + " mean±sd";
    out += "\tms/prediction\n";
    char buf[64];
    for (const auto& m : report.methods) {
        out += m.name + "\t" + m.classifier + "\t" + m.corrector;
        if (m.failure) {
            for (std::size_t i = 0; i < report.top_ks.size(); ++i) out += "\t-";
            out += "\tfailed: " + *m.failure + "\n";
            continue;
        }
        for (const auto& s : m.stats) {
            std::snprintf(buf, sizeof buf, "\t%.4f±%.4f", s.mean, s.stddev);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "\t%.4f\n", m.ms_per_prediction);
        out += buf;
    }
    return out;
}

std::string report_to_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["runs"] = report.runs;
    j["base_seed"] = report.base_seed;
    j["top_ks"] = report.top_ks;
    j["audited_fits"] = report.audited_fits;
    j["leakage_violations"] = report.leakage_violations;
    j["methods"] = ordered_json::array();
    for (const auto& m : report.methods) {
        ordered_json jm;
        jm["name"] = m.name;
        jm["classifier"] = m.classifier;
        jm["corrector"] = m.corrector;
        if (m.failure) {
            jm["failure"] = *m.failure;
        } else {
            jm["stats"] = ordered_json::array();
            for (const auto& s : m.stats)
                jm["stats"].push_back({{"k", s.k}, {"mean", s.mean}, {"stddev", s.stddev}});
            jm["per_run"] = m.per_run;
        }
        j["methods"].push_back(std::move(jm));
    }
    return j.dump(2) + "\n";
}

}  // namespace raman
