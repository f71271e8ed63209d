#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "raman/dataset.hpp"
#include "raman/error.hpp"

using namespace raman;

namespace {

RruffRecord record(const std::string& name, double scale = 1.0) {
    RruffRecord r;
    r.metadata["NAMES"] = name;
    for (int i = 0; i <= 20; ++i) r.points.emplace_back(100.0 + 90.0 * i, scale * (i % 7));
    return r;
}

LabeledDataset dataset_with_counts(const std::vector<std::size_t>& counts) {
    LabeledDataset d;
    d.grid = Grid{0.0, 1.0, 2};
    for (std::size_t c = 0; c < counts.size(); ++c) {
        d.class_names.push_back("c" + std::to_string(c));
        for (std::size_t i = 0; i < counts[c]; ++i) d.samples.push_back({{0.0, 1.0}, c});
    }
    d.recount();
    return d;
}

}  // namespace

TEST(BuildDataset, ClassesByFirstAppearance) {
    const std::vector<RruffRecord> recs{record("B"), record("A"), record("B", 2.0)};
    const auto built = build_dataset(recs, Grid{100.0, 1900.0, 64});
    const auto& d = built.dataset;
    EXPECT_EQ(d.num_classes(), 2u);
    EXPECT_EQ(d.class_names, (std::vector<std::string>{"B", "A"}));
    EXPECT_EQ(d.class_counts, (std::vector<std::size_t>{2, 1}));
    EXPECT_EQ(d.size(), 3u);
    for (const auto& s : d.samples) {
        EXPECT_EQ(s.features.size(), 64u);
        EXPECT_EQ(*std::min_element(s.features.begin(), s.features.end()), 0.0);
        EXPECT_EQ(*std::max_element(s.features.begin(), s.features.end()), 1.0);
    }
    EXPECT_NO_THROW(d.validate());
}

TEST(BuildDataset, EmptyIsError) {
    try {
        build_dataset({}, Grid{});
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_STREQ(e.what(), "empty dataset");
    }
}

TEST(BuildDataset, SkipsUnusableRecords) {
    auto flat = record("C");
    for (auto& p : flat.points) p.second = 1.0;  // constant: cannot be min-max scaled
    auto unnamed = record("D");
    unnamed.metadata.clear();
    const std::vector<RruffRecord> recs{record("A"), flat, unnamed};
    const auto built = build_dataset(recs, Grid{100.0, 1900.0, 32});
    EXPECT_EQ(built.dataset.size(), 1u);
    ASSERT_EQ(built.skipped.size(), 2u);
    EXPECT_EQ(built.skipped[0].index, 1u);
    EXPECT_EQ(built.skipped[1].index, 2u);
}

TEST(LooSplit, OneTestPerTestableClass) {
    const auto d = dataset_with_counts({3, 1, 2, 5});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = loo_split(d, seed);
        EXPECT_EQ(s.test_indices.size(), 3u);
        EXPECT_EQ(s.train_indices.size() + s.test_indices.size(), d.size());
        std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
        all.insert(s.test_indices.begin(), s.test_indices.end());
        EXPECT_EQ(all.size(), d.size());
        std::set<std::size_t> test_classes;
        for (std::size_t i : s.test_indices) test_classes.insert(d.samples[i].class_index);
        EXPECT_EQ(test_classes, (std::set<std::size_t>{0, 2, 3}));
        EXPECT_TRUE(std::find(s.train_indices.begin(), s.train_indices.end(), 3u) != s.train_indices.end());
    }
}

TEST(LooSplit, DeterministicPerSeed) {
    const auto d = dataset_with_counts({4, 4, 4});
    const auto a = loo_split(d, 99);
    const auto b = loo_split(d, 99);
    EXPECT_EQ(a.test_indices, b.test_indices);
    EXPECT_EQ(a.train_indices, b.train_indices);
}

TEST(LooSplit, AllSingletonsIsError) {
    EXPECT_THROW(loo_split(dataset_with_counts({1, 1, 1}), 0), InvalidArgument);
}

TEST(LooSplit, TwoSampleClassIsFair) {
    // Chi-square with one degree of freedom at p = 0.001 is 10.83.
    const auto d = dataset_with_counts({2});
    const int trials = 4000;
    int first = 0;
    for (int seed = 0; seed < trials; ++seed) first += loo_split(d, static_cast<std::uint64_t>(seed)).test_indices[0] == 0;
    const double freq = static_cast<double>(first) / trials;
    EXPECT_NEAR(freq, 0.5, 0.05);
    const double e = trials / 2.0;
    const double chi2 = (first - e) * (first - e) / e + (trials - first - e) * (trials - first - e) / e;
    EXPECT_LT(chi2, 10.83);
}

TEST(DatasetCache, RoundTripAndVersion) {
    const std::vector<RruffRecord> recs{record("B"), record("A"), record("B", 2.0)};
    const auto d = build_dataset(recs, Grid{100.0, 1900.0, 40}).dataset;
    const auto path = std::filesystem::temp_directory_path() / "raman_dataset_roundtrip.rmds";
    save_dataset(d, path);
    EXPECT_EQ(load_dataset(path), d);

    // Corrupt the version field that follows the 4-byte magic.
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const char v = 99;
        f.write(&v, 1);
    }
    EXPECT_THROW(load_dataset(path), FormatError);
    std::filesystem::remove(path);
}

TEST(LabeledDataset, ValidateCatchesStaleCounts) {
    auto d = dataset_with_counts({2, 2});
    d.class_counts[0] = 5;
    EXPECT_THROW(d.validate(), InvalidArgument);
    d.recount();
    EXPECT_NO_THROW(d.validate());
    const auto sub = d.subset(std::vector<std::size_t>{3, 0});
    EXPECT_EQ(sub.class_counts, (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(sub.samples[0].class_index, 1u);
}
