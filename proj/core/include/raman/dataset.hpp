#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "raman/rruff.hpp"
#include "raman/spectrum.hpp"

namespace raman {

struct Sample {
    std::vector<double> features;
    std::size_t class_index = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Spectra resampled onto a common grid, grouped by species.
struct LabeledDataset {
    Grid grid;
    std::vector<Sample> samples;
    std::vector<std::string> class_names;
    std::vector<std::size_t> class_counts;

    std::size_t size() const { return samples.size(); }
    std::size_t num_classes() const { return class_names.size(); }

    /// Recomputes class_counts from samples.
    void recount();

    /// Throws InvalidArgument when any invariant is violated.
    void validate() const;

    /// Same grid and class table, only the listed samples (in the given order).
    LabeledDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

struct SkippedRecord {
    std::size_t index;
    std::string reason;
};

struct BuildResult {
    LabeledDataset dataset;
    std::vector<SkippedRecord> skipped;
};

/// features = min_max_scale(resample(record, grid)); classes numbered by first appearance.
/// Records that cannot be resampled are skipped with a warning.
/// Throws InvalidArgument if nothing usable remains ("empty dataset").
BuildResult build_dataset(std::span<const RruffRecord> records, const Grid& grid);

struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

/// Per-class leave-one-out: every class with at least two samples sends one
/// uniformly chosen member to test. Singleton classes stay in training.
Split loo_split(const LabeledDataset& d, std::uint64_t seed);

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

void save_dataset(const LabeledDataset& d, const std::filesystem::path& path);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace raman
