#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "raman/harness.hpp"
#include "raman/synth.hpp"

namespace raman::cli {

/// Malformed experiment file. The message names the line and the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentFile {
    std::optional<std::filesystem::path> dataset;  // dataset cache produced by `ingest`
    std::optional<SynthConfig> synth;               // generate instead of loading
    bool synth_clean = false;
    ExperimentConfig experiment;
    std::optional<std::filesystem::path> table_path;
    std::optional<std::filesystem::path> report_path;
};

ExperimentFile parse_experiment(const std::string& yaml_text);
ExperimentFile load_experiment(const std::filesystem::path& path);

/// Corrector spec from a bare name ("none" gives nullopt) or "name:key=value,key=value".
std::optional<BaselineMethod> parse_corrector(const std::string& spec);

}  // namespace raman::cli
