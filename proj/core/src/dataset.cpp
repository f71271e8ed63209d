#include "raman/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "binary_io.hpp"
#include "raman/error.hpp"
#include "raman/rng.hpp"

namespace raman {

void LabeledDataset::recount() {
    class_counts.assign(class_names.size(), 0);
    for (const auto& s : samples) ++class_counts.at(s.class_index);
}

void LabeledDataset::validate() const {
    grid.validate();
    if (class_counts.size() != class_names.size())
        throw InvalidArgument("dataset: class_counts and class_names differ in length");
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.class_index >= class_names.size())
            throw InvalidArgument("dataset: sample " + std::to_string(i) + " has class index " +
                                  std::to_string(s.class_index) + " out of range");
        if (s.features.size() != grid.points)
            throw InvalidArgument("dataset: sample " + std::to_string(i) + " has " +
                                  std::to_string(s.features.size()) + " features, grid has " +
                                  std::to_string(grid.points));
        ++counts[s.class_index];
    }
    if (counts != class_counts) throw InvalidArgument("dataset: class_counts out of date");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.grid = grid;
    out.class_names = class_names;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(samples.at(i));
    out.recount();
    return out;
}

BuildResult build_dataset(std::span<const RruffRecord> records, const Grid& grid) {
    grid.validate();
    BuildResult result;
    auto& d = result.dataset;
    d.grid = grid;
    std::map<std::string, std::size_t> class_of;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto species = records[r].species();
        if (!species) {
            result.skipped.push_back({r, "missing NAMES/MINERAL"});
            continue;
        }
        try {
            auto features = min_max_scale(resample(to_spectrum(records[r]), grid));
            auto [it, inserted] = class_of.try_emplace(*species, d.class_names.size());
            if (inserted) d.class_names.push_back(*species);
            d.samples.push_back({std::move(features), it->second});
        } catch (const InvalidArgument& e) {
            result.skipped.push_back({r, e.what()});
        }
    }
    for (const auto& s : result.skipped)
        spdlog::warn("skipping record {}: {}", s.index, s.reason);
    if (d.samples.empty()) throw InvalidArgument("empty dataset");
    d.recount();
    return result;
}

Split loo_split(const LabeledDataset& d, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> members(d.num_classes());
    for (std::size_t i = 0; i < d.samples.size(); ++i)
        members.at(d.samples[i].class_index).push_back(i);

    Rng rng(seed);
    std::vector<bool> is_test(d.samples.size(), false);
    std::size_t testable = 0;
    for (const auto& m : members) {
        if (m.size() < 2) continue;
        ++testable;
        std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
        is_test[m[pick(rng)]] = true;
    }
    if (testable == 0) throw InvalidArgument("no testable classes");

    Split split;
    for (std::size_t i = 0; i < d.samples.size(); ++i)
        (is_test[i] ? split.test_indices : split.train_indices).push_back(i);
    return split;
}

void save_dataset(const LabeledDataset& d, const std::filesystem::path& path) {
    d.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    detail::Writer w(out);
    w.magic("RMDS");
    w.u32(kDatasetFormatVersion);
    w.f64(d.grid.start);
    w.f64(d.grid.stop);
    w.u64(d.grid.points);
    w.u64(d.class_names.size());
    for (const auto& name : d.class_names) w.str(name);
    w.u64(d.samples.size());
    for (const auto& s : d.samples) {
        w.u64(s.class_index);
        for (double v : s.features) w.f64(v);
    }
    w.check();
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    detail::Reader r(in);
    r.expect_magic("RMDS", "dataset cache");
    const auto version = r.u32();
    if (version != kDatasetFormatVersion)
        throw FormatError("dataset cache: unsupported format version " + std::to_string(version));
    LabeledDataset d;
    d.grid.start = r.f64();
    d.grid.stop = r.f64();
    d.grid.points = detail::Reader::bounded(r.u64());
    d.class_names.resize(detail::Reader::bounded(r.u64()));
    for (auto& name : d.class_names) name = r.str();
    d.samples.resize(detail::Reader::bounded(r.u64()));
    for (auto& s : d.samples) {
        s.class_index = r.u64();
        s.features.resize(d.grid.points);
        for (double& v : s.features) v = r.f64();
    }
    d.class_counts.assign(d.class_names.size(), 0);
    for (const auto& s : d.samples) {
        if (s.class_index >= d.class_names.size())
            throw FormatError("dataset cache: class index out of range");
        ++d.class_counts[s.class_index];
    }
    try {
        d.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("dataset cache: ") + e.what());
    }
    return d;
}

}  // namespace raman
