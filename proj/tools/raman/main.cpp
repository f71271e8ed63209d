#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "raman/augment.hpp"
#include "raman/baseline.hpp"
#include "raman/dataset.hpp"
#include "raman/error.hpp"
#include "raman/harness.hpp"
#include "raman/nn/serialize.hpp"
#include "raman/nn/train.hpp"
#include "raman/rruff.hpp"
#include "raman/synth.hpp"

namespace fs = std::filesystem;
using namespace raman;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Usage and configuration mistakes map to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

fs::path data_path(const std::string& given) {
    fs::path p(given);
    if (p.is_relative() && !fs::exists(p)) {
        if (const char* dir = std::getenv("RAMAN_DATA_DIR"); dir && *dir) {
            const auto candidate = fs::path(dir) / p;
            if (fs::exists(candidate)) return candidate;
        }
    }
    return p;
}

struct GridFlags {
    double start = 100.0;
    double stop = 1900.0;
    std::size_t points = 1024;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--start", start, "Grid start (cm^-1)")->capture_default_str();
        cmd->add_option("--stop", stop, "Grid stop (cm^-1)")->capture_default_str();
        cmd->add_option("--points", points, "Grid points")->capture_default_str();
    }
    Grid grid() const {
        Grid g{start, stop, points};
        try {
            g.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        return g;
    }
};

int cmd_ingest(const std::string& dir_arg, const GridFlags& gf, const std::string& out) {
    const auto grid = gf.grid();
    fs::path dir = dir_arg.empty() ? fs::path() : data_path(dir_arg);
    if (dir.empty()) {
        const char* env = std::getenv("RAMAN_DATA_DIR");
        if (!env || !*env) throw UsageError("no input directory given and RAMAN_DATA_DIR is unset");
        dir = env;
    }
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error("cannot read directory '" + dir.string() + "'");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.is_regular_file()) files.push_back(entry.path());
    if (ec) throw Error("cannot read directory '" + dir.string() + "': " + ec.message());
    std::sort(files.begin(), files.end());

    std::vector<RruffRecord> records;
    std::size_t unreadable = 0;
    for (const auto& f : files) {
        try {
            records.push_back(read_rruff_file(f));
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
            ++unreadable;
        }
    }
    if (records.empty()) throw Error("empty dataset");
    const auto built = build_dataset(records, grid);
    const auto& d = built.dataset;
    save_dataset(d, out);

    std::cout << "N=" << d.size() << " K=" << d.num_classes()
              << " skipped=" << unreadable + built.skipped.size() << "\n";
    std::map<std::size_t, std::size_t> histogram;  // spectra per class -> number of classes
    for (std::size_t c : d.class_counts) ++histogram[c];
    std::cout << "spectra_per_class\tclasses\n";
    for (const auto& [count, classes] : histogram) std::cout << count << "\t" << classes << "\n";
    return 0;
}

int cmd_correct(const std::string& input, const std::string& method_spec, const std::string& out) {
    std::optional<BaselineMethod> method;
    try {
        method = cli::parse_corrector(method_spec);
    } catch (const cli::ConfigError& e) {
        throw UsageError(e.what());
    }
    if (!method) throw UsageError("--method must name a baseline estimator");
    const auto record = read_rruff_file(data_path(input));
    auto corrected = to_record(correct(to_spectrum(record), *method));
    corrected.metadata = record.metadata;
    corrected.metadata["BASELINE CORRECTION"] = method->name();
    if (out.empty())
        std::cout << serialize_rruff(corrected);
    else
        write_rruff_file(out, corrected);
    return 0;
}

int cmd_augment_preview(const std::string& dataset, std::size_t sample, int count, const AugmentConfig& base) {
    const auto d = load_dataset(data_path(dataset));
    if (sample >= d.size()) throw UsageError("--sample out of range (dataset has " + std::to_string(d.size()) + ")");
    AugmentConfig ac = base;
    try {
        ac.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    Rng rng(mix_seed(ac.seed, sample));
    std::uniform_int_distribution<int> offset(-ac.max_shift, ac.max_shift);
    const auto& x = d.samples[sample].features;
    std::vector<std::vector<double>> variants;
    std::cout << "# seed=" << ac.seed << " sample=" << sample << " class=" << d.class_names[d.samples[sample].class_index]
              << "\n";
    std::cout << "wavenumber\toriginal";
    for (int v = 0; v < count; ++v) {
        const int off = offset(rng);
        variants.push_back(proportional_noise(shift(x, off), ac.noise_scale, rng));
        std::cout << "\tshift" << (off >= 0 ? "+" : "") << off;
    }
    std::cout << "\n";
    char buf[64];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f\t%.6f", d.grid.at(i), x[i]);
        std::cout << buf;
        for (const auto& v : variants) {
            std::snprintf(buf, sizeof buf, "\t%.6f", v[i]);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_train(const std::string& dataset, const std::string& out, nn::TrainConfig tc, const AugmentConfig& ac,
              const std::string& corrector_spec) {
    auto d = load_dataset(data_path(dataset));
    std::optional<BaselineMethod> corrector;
    try {
        corrector = cli::parse_corrector(corrector_spec);
        tc.validate();
        ac.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (corrector) d = apply_corrector(d, *corrector);
    std::cout << "# seed=" << tc.seed << " augment_seed=" << ac.seed << " N=" << d.size()
              << " K=" << d.num_classes() << " points=" << d.grid.points << "\n";
    auto model = nn::build_model(d.grid.points, d.num_classes(), nn::ArchSpec::pyramid(), tc.seed, tc.init_std);
    model.grid = d.grid;
    model.class_names = d.class_names;
    std::cout << "epoch\ttrain_loss\tval_loss\tval_accuracy\n";
    const auto result = nn::train(std::move(model), d, tc, ac, [](const nn::EpochRecord& e) {
        std::printf("%d\t%.6f\t%.6f\t%.4f\n", e.epoch, e.train_loss, e.val_loss, e.val_accuracy);
        std::fflush(stdout);
    });
    nn::save_model(result.model, out);
    std::cout << "# best_epoch=" << result.history.best_epoch
              << " stopped_early=" << (result.history.stopped_early ? "yes" : "no") << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& spectrum_path, int top) {
    nn::Model model;
    try {
        model = nn::load_model(data_path(model_path));
    } catch (const std::exception& e) {
        throw Error(std::string("cannot load model: ") + e.what());
    }
    const auto spectrum = to_spectrum(read_rruff_file(data_path(spectrum_path)));
    const auto features = min_max_scale(resample(spectrum, model.grid));
    const auto pred = nn::predict(model, features);
    if (top < 1) throw UsageError("--top must be >= 1");
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(top), pred.ranking.size());
    for (std::size_t r = 0; r < k; ++r) {
        const auto c = pred.ranking[r];
        std::printf("%zu\t%s\t%.6f\n", r + 1, model.class_names[c].c_str(), pred.probabilities[c]);
    }
    return 0;
}

int cmd_evaluate(const std::string& config_path, std::optional<int> runs, std::optional<std::uint64_t> seed,
                 std::optional<int> jobs, const std::string& table_out, const std::string& report_out) {
    cli::ExperimentFile f;
    try {
        f = cli::load_experiment(data_path(config_path));
        if (runs) f.experiment.runs = *runs;
        if (seed) f.experiment.base_seed = *seed;
        if (jobs) f.experiment.jobs = *jobs;
        f.experiment.validate();
    } catch (const cli::ConfigError& e) {
        throw UsageError(e.what());
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (!table_out.empty()) f.table_path = table_out;
    if (!report_out.empty()) f.report_path = report_out;

    LabeledDataset d;
    if (f.synth) {
        const auto s = synth_dataset(*f.synth);
        d = f.synth_clean ? s.clean : s.raw;
    } else if (f.dataset) {
        d = load_dataset(data_path(f.dataset->string()));
    } else {
        throw UsageError("config: need 'dataset' or 'synth'");
    }

    const auto report = run_experiment(f.experiment, d);
    const auto table = format_table(report);
    std::cout << "# seed=" << report.base_seed << " runs=" << report.runs << " N=" << d.size()
              << " K=" << d.num_classes() << " leakage_violations=" << report.leakage_violations << "\n";
    std::cout << table;
    if (f.table_path) write_text(*f.table_path, table);
    if (f.report_path) write_text(*f.report_path, report_to_json(report));
    for (const auto& m : report.methods)
        if (m.failure) std::cerr << "warning: method " << m.name << " failed: " << *m.failure << "\n";
    if (report.all_failed()) throw Error("all methods failed");
    return 0;
}

int cmd_synth(const SynthConfig& cfg, bool clean, const std::string& out, const std::string& rruff_dir) {
    if (out.empty() && rruff_dir.empty()) throw UsageError("give --out and/or --rruff-dir");
    SynthDataset s;
    try {
        s = synth_dataset(cfg);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const auto& d = clean ? s.clean : s.raw;
    if (!out.empty()) save_dataset(d, out);
    if (!rruff_dir.empty()) {
        fs::create_directories(rruff_dir);
        const auto axis = d.grid.axis();
        for (std::size_t i = 0; i < d.size(); ++i) {
            RruffRecord r;
            r.metadata["NAMES"] = d.class_names[d.samples[i].class_index];
            r.metadata["RRUFFID"] = "S" + std::to_string(i);
            for (std::size_t j = 0; j < axis.size(); ++j) r.points.emplace_back(axis[j], d.samples[i].features[j]);
            char name[32];
            std::snprintf(name, sizeof name, "synth_%05zu.txt", i);
            write_rruff_file(fs::path(rruff_dir) / name, r);
        }
    }
    std::cout << "# seed=" << cfg.seed << " N=" << d.size() << " K=" << d.num_classes()
              << " variant=" << (clean ? "clean" : "raw") << "\n";
    return 0;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Raman spectrum identification toolkit"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all");

    std::string dir, out, input, method, dataset, model_path, spectrum_path, config, table_out, report_out, rruff_dir;
    std::string corrector_spec = "none";
    GridFlags gf;

    auto* ingest = app.add_subcommand("ingest", "Build a dataset cache from a directory of RRUFF files");
    ingest->add_option("dir", dir, "Spectrum directory (defaults to $RAMAN_DATA_DIR)");
    gf.add_to(ingest);
    ingest->add_option("-o,--out", out, "Dataset cache path")->required();

    auto* corr = app.add_subcommand("correct", "Baseline-correct one spectrum file");
    corr->add_option("input", input, "RRUFF spectrum file")->required();
    corr->add_option("-m,--method", method, "Estimator, e.g. rubber_band or asym_ls:lambda=1e6,p=0.001")->required();
    corr->add_option("-o,--out", out, "Output file (stdout when omitted)");

    AugmentConfig ac;
    std::size_t sample = 0;
    int count = 3;
    auto* prev = app.add_subcommand("augment-preview", "Print augmented variants of one dataset sample");
    prev->add_option("dataset", dataset, "Dataset cache")->required();
    prev->add_option("--sample", sample, "Sample index")->capture_default_str();
    prev->add_option("--count", count, "Number of variants")->capture_default_str()->check(CLI::Range(1, 100));
    prev->add_option("--max-shift", ac.max_shift)->capture_default_str();
    prev->add_option("--noise", ac.noise_scale)->capture_default_str();
    prev->add_option("--seed", ac.seed)->capture_default_str();

    nn::TrainConfig tc;
    AugmentConfig train_ac;
    auto* trn = app.add_subcommand("train", "Train the CNN on a dataset cache");
    trn->add_option("dataset", dataset, "Dataset cache")->required();
    trn->add_option("-o,--out", out, "Model output path")->required();
    trn->add_option("--epochs", tc.epochs)->capture_default_str();
    trn->add_option("--lr", tc.learning_rate)->capture_default_str();
    trn->add_option("--batch-size", tc.batch_size)->capture_default_str();
    trn->add_option("--patience", tc.early_stop_patience)->capture_default_str();
    trn->add_option("--val-fraction", tc.validation_fraction)->capture_default_str();
    trn->add_option("--seed", tc.seed)->capture_default_str();
    trn->add_option("--corrector", corrector_spec, "Baseline corrector applied before training")->capture_default_str();
    trn->add_option("--copies", train_ac.copies_per_sample, "Shifted+noised copies per sample")->capture_default_str();
    trn->add_option("--mixes", train_ac.mixes_per_class, "Mixtures per class")->capture_default_str();
    trn->add_option("--max-shift", train_ac.max_shift)->capture_default_str();
    trn->add_option("--aug-noise", train_ac.noise_scale)->capture_default_str();
    trn->add_option("--aug-seed", train_ac.seed)->capture_default_str();

    int top = 3;
    auto* pred = app.add_subcommand("predict", "Rank classes for one spectrum");
    pred->add_option("-m,--model", model_path, "Trained model")->required();
    pred->add_option("spectrum", spectrum_path, "RRUFF spectrum file")->required();
    pred->add_option("-k,--top", top, "Number of ranked classes to print")->capture_default_str();

    std::optional<int> runs, jobs;
    std::optional<std::uint64_t> eval_seed;
    auto* eval = app.add_subcommand("evaluate", "Run a method comparison experiment");
    eval->add_option("config", config, "Experiment YAML file")->required();
    eval->add_option("--runs", runs, "Override the number of runs");
    eval->add_option("--seed", eval_seed, "Override the base seed");
    eval->add_option("--jobs", jobs, "Worker threads");
    eval->add_option("--table", table_out, "Write the table here");
    eval->add_option("--report", report_out, "Write the JSON report here");

    SynthConfig sc;
    bool clean = false;
    auto* syn = app.add_subcommand("synth", "Generate a synthetic dataset");
    syn->add_option("-o,--out", out, "Dataset cache path");
    syn->add_option("--rruff-dir", rruff_dir, "Also write one RRUFF file per sample here");
    syn->add_option("--classes", sc.classes)->capture_default_str();
    syn->add_option("--per-class", sc.per_class)->capture_default_str();
    syn->add_option("--severity", sc.baseline_severity)->capture_default_str();
    syn->add_option("--noise", sc.noise)->capture_default_str();
    syn->add_option("--seed", sc.seed)->capture_default_str();
    syn->add_option("--points", sc.grid.points)->capture_default_str();
    syn->add_flag("--clean", clean, "Emit the baseline-free variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << one_line(e.what()) << "\n";
        return kExitUsage;
    }

    try {
        if (*ingest) return cmd_ingest(dir, gf, out);
        if (*corr) return cmd_correct(input, method, out);
        if (*prev) return cmd_augment_preview(dataset, sample, count, ac);
        if (*trn) return cmd_train(dataset, out, tc, train_ac, corrector_spec);
        if (*pred) return cmd_predict(model_path, spectrum_path, top);
        if (*eval) return cmd_evaluate(config, runs, eval_seed, jobs, table_out, report_out);
        if (*syn) return cmd_synth(sc, clean, out, rruff_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << one_line(e.what()) << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << one_line(e.what()) << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
