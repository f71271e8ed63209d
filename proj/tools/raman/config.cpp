#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "raman/error.hpp"

namespace raman::cli {
namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) {
    std::string where;
    if (node.IsDefined() && node.Mark().line >= 0) where = "line " + std::to_string(node.Mark().line + 1) + ": ";
    throw ConfigError(where + field + ": " + msg);
}

void check_keys(const YAML::Node& map, const std::string& field, const std::set<std::string>& allowed) {
    if (!map.IsMap()) fail(map, field, "expected a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(kv.first, field + "." + key, "unknown key");
    }
}

template <typename T>
void read(const YAML::Node& map, const char* key, const std::string& field, T& out) {
    const auto node = map[key];
    if (!node) return;
    try {
        out = node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, field + "." + key, "invalid value '" + (node.IsScalar() ? node.Scalar() : std::string("<node>")) + "'");
    }
}

BaselineMethod corrector_from_node(const YAML::Node& node, const std::string& field) {
    if (node.IsScalar()) {
        try {
            return BaselineMethod::from_name(node.Scalar());
        } catch (const InvalidArgument& e) {
            fail(node, field, e.what());
        }
    }
    if (!node.IsMap() || !node["method"]) fail(node, field, "expected a method name or a mapping with 'method'");
    const auto name = node["method"].as<std::string>();
    BaselineMethod base;
    try {
        base = BaselineMethod::from_name(name);
    } catch (const InvalidArgument& e) {
        fail(node["method"], field + ".method", e.what());
    }
    auto params = base.params();
    std::visit(
        [&](auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AsymLsParams>) {
                check_keys(node, field, {"method", "lambda", "p", "max_iter"});
                read(node, "lambda", field, p.lambda);
                read(node, "p", field, p.p);
                read(node, "max_iter", field, p.max_iter);
            } else if constexpr (std::is_same_v<P, AirPlsParams>) {
                check_keys(node, field, {"method", "lambda", "max_iter"});
                read(node, "lambda", field, p.lambda);
                read(node, "max_iter", field, p.max_iter);
            } else if constexpr (std::is_same_v<P, ModPolyParams>) {
                check_keys(node, field, {"method", "degree", "max_iter", "tol"});
                read(node, "degree", field, p.degree);
                read(node, "max_iter", field, p.max_iter);
                read(node, "tol", field, p.tol);
            } else if constexpr (std::is_same_v<P, RollingBallParams>) {
                check_keys(node, field, {"method", "radius"});
                read(node, "radius", field, p.radius);
            } else if constexpr (std::is_same_v<P, RubberBandParams>) {
                check_keys(node, field, {"method"});
            } else if constexpr (std::is_same_v<P, IrlsParams>) {
                check_keys(node, field, {"method", "lambda1", "lambda2", "max_iter"});
                read(node, "lambda1", field, p.lambda1);
                read(node, "lambda2", field, p.lambda2);
                read(node, "max_iter", field, p.max_iter);
            } else if constexpr (std::is_same_v<P, RobustLrParams>) {
                check_keys(node, field, {"method", "span", "max_iter"});
                read(node, "span", field, p.span);
                read(node, "max_iter", field, p.max_iter);
            }
        },
        params);
    BaselineMethod method(params);
    try {
        method.validate();
    } catch (const InvalidArgument& e) {
        fail(node, field, e.what());
    }
    return method;
}

nn::ArchSpec arch_from_node(const YAML::Node& node, const std::string& field) {
    check_keys(node, field, {"conv", "dense_units", "dropout", "leaky_slope"});
    auto arch = nn::ArchSpec::pyramid();
    if (const auto conv = node["conv"]) {
        if (!conv.IsSequence() || conv.size() == 0) fail(conv, field + ".conv", "expected a nonempty list");
        arch.conv.clear();
        for (std::size_t i = 0; i < conv.size(); ++i) {
            const auto c = conv[i];
            const auto f = field + ".conv[" + std::to_string(i) + "]";
            if (!c.IsSequence() || c.size() != 3) fail(c, f, "expected [channels, kernel_width, pool]");
            try {
                arch.conv.push_back({c[0].as<std::size_t>(), c[1].as<std::size_t>(), c[2].as<std::size_t>()});
            } catch (const YAML::Exception&) {
                fail(c, f, "expected three positive integers");
            }
        }
    }
    read(node, "dense_units", field, arch.dense_units);
    read(node, "dropout", field, arch.dropout);
    read(node, "leaky_slope", field, arch.leaky_slope);
    return arch;
}

MethodConfig method_from_node(const YAML::Node& node, const std::string& field) {
    check_keys(node, field,
               {"name", "classifier", "corrector", "pca", "pca_retained", "k", "svm", "train", "arch"});
    MethodConfig m;
    if (!node["classifier"]) fail(node, field, "missing 'classifier'");
    try {
        m.classifier = classifier_from_name(node["classifier"].as<std::string>());
    } catch (const InvalidArgument& e) {
        fail(node["classifier"], field + ".classifier", e.what());
    }
    if (const auto c = node["corrector"]; c && !(c.IsScalar() && c.Scalar() == "none"))
        m.corrector = corrector_from_node(c, field + ".corrector");
    m.name = to_string(m.classifier) + ":" + m.corrector_name();
    read(node, "name", field, m.name);
    read(node, "pca", field, m.pca);
    read(node, "pca_retained", field, m.pca_retained);
    read(node, "k", field, m.knn_k);
    if (const auto s = node["svm"]) {
        const auto f = field + ".svm";
        check_keys(s, f, {"epochs", "learning_rate", "reg"});
        read(s, "epochs", f, m.svm.epochs);
        read(s, "learning_rate", f, m.svm.learning_rate);
        read(s, "reg", f, m.svm.reg);
    }
    if (const auto t = node["train"]) {
        const auto f = field + ".train";
        check_keys(t, f, {"epochs", "learning_rate", "beta1", "beta2", "epsilon", "batch_size", "init_std",
                          "patience", "validation_fraction", "seed"});
        read(t, "epochs", f, m.train.epochs);
        read(t, "learning_rate", f, m.train.learning_rate);
        read(t, "beta1", f, m.train.beta1);
        read(t, "beta2", f, m.train.beta2);
        read(t, "epsilon", f, m.train.epsilon);
        read(t, "batch_size", f, m.train.batch_size);
        read(t, "init_std", f, m.train.init_std);
        read(t, "patience", f, m.train.early_stop_patience);
        read(t, "validation_fraction", f, m.train.validation_fraction);
        read(t, "seed", f, m.train.seed);
    }
    if (const auto a = node["arch"]) m.arch = arch_from_node(a, field + ".arch");
    return m;
}

AugmentConfig augment_from_node(const YAML::Node& node) {
    check_keys(node, "augment", {"max_shift", "noise_scale", "mixes_per_class", "copies_per_sample", "seed"});
    AugmentConfig a;
    read(node, "max_shift", "augment", a.max_shift);
    read(node, "noise_scale", "augment", a.noise_scale);
    read(node, "mixes_per_class", "augment", a.mixes_per_class);
    read(node, "copies_per_sample", "augment", a.copies_per_sample);
    read(node, "seed", "augment", a.seed);
    return a;
}

SynthConfig synth_from_node(const YAML::Node& node, bool& clean) {
    check_keys(node, "synth", {"classes", "per_class", "baseline_severity", "noise", "seed", "points", "clean"});
    SynthConfig s;
    read(node, "classes", "synth", s.classes);
    read(node, "per_class", "synth", s.per_class);
    read(node, "baseline_severity", "synth", s.baseline_severity);
    read(node, "noise", "synth", s.noise);
    read(node, "seed", "synth", s.seed);
    read(node, "points", "synth", s.grid.points);
    read(node, "clean", "synth", clean);
    return s;
}

}  // namespace

ExperimentFile parse_experiment(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError("line 1: top level must be a mapping");
    check_keys(root, "config", {"dataset", "synth", "runs", "top_ks", "seed", "jobs", "augment", "methods", "output"});

    ExperimentFile f;
    auto& e = f.experiment;
    if (const auto d = root["dataset"]) f.dataset = d.as<std::string>();
    if (const auto s = root["synth"]) f.synth = synth_from_node(s, f.synth_clean);
    if (f.dataset && f.synth) fail(root["synth"], "synth", "give either 'dataset' or 'synth', not both");
    read(root, "runs", "config", e.runs);
    read(root, "seed", "config", e.base_seed);
    read(root, "jobs", "config", e.jobs);
    if (const auto k = root["top_ks"]) {
        if (!k.IsSequence()) fail(k, "top_ks", "expected a list of integers");
        read(root, "top_ks", "config", e.top_ks);
    }
    if (const auto a = root["augment"]) e.augment = augment_from_node(a);
    const auto methods = root["methods"];
    if (!methods || !methods.IsSequence() || methods.size() == 0)
        fail(methods ? methods : root, "methods", "expected a nonempty list");
    for (std::size_t i = 0; i < methods.size(); ++i)
        e.methods.push_back(method_from_node(methods[i], "methods[" + std::to_string(i) + "]"));
    if (const auto o = root["output"]) {
        check_keys(o, "output", {"table", "report"});
        if (o["table"]) f.table_path = o["table"].as<std::string>();
        if (o["report"]) f.report_path = o["report"].as<std::string>();
    }
    try {
        e.validate();
        if (f.synth) f.synth->grid.validate();
    } catch (const InvalidArgument& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    return f;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment(ss.str());
}

std::optional<BaselineMethod> parse_corrector(const std::string& spec) {
    if (spec.empty() || spec == "none") return std::nullopt;
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        try {
            return BaselineMethod::from_name(spec);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    std::string yaml = "{method: " + spec.substr(0, colon);
    std::stringstream rest(spec.substr(colon + 1));
    std::string kv;
    while (std::getline(rest, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("corrector parameter '" + kv + "' is not key=value");
        yaml += ", " + kv.substr(0, eq) + ": " + kv.substr(eq + 1);
    }
    yaml += "}";
    return corrector_from_node(YAML::Load(yaml), "corrector");
}

}  // namespace raman::cli
