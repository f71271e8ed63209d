#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "random_rruff.hpp"
#include "raman/error.hpp"
#include "raman/rruff.hpp"

using namespace raman;

TEST(ParseRruff, HeaderAndPoints) {
    const auto r = parse_rruff("##NAMES=Actinolite\n100.0, 5.0\n101.0, 6.0\n##END=");
    EXPECT_EQ(r.metadata.at("NAMES"), "Actinolite");
    ASSERT_EQ(r.points.size(), 2u);
    EXPECT_EQ(r.points[1], (std::pair{101.0, 6.0}));
    EXPECT_EQ(r.species(), "Actinolite");
}

TEST(ParseRruff, KeysUppercasedAndTrimmed) {
    const auto r = parse_rruff("## names =  Quartz \r\n\n1,2\n3 ,4\n");
    EXPECT_EQ(r.metadata.at("NAMES"), "Quartz");
    EXPECT_EQ(r.points.size(), 2u);
}

TEST(ParseRruff, MineralFallback) {
    const auto r = parse_rruff("##MINERAL=Calcite\n1,2\n");
    EXPECT_EQ(r.species(), "Calcite");
    EXPECT_FALSE(parse_rruff("1,2\n").species().has_value());
}

TEST(ParseRruff, HeaderOnlyIsError) {
    EXPECT_THROW(parse_rruff("##NAMES=X\n##END=\n"), ParseError);
}

TEST(ParseRruff, BadLineReportsLineNumber) {
    try {
        parse_rruff("##NAMES=X\n1,2\nnot a number\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_THROW(parse_rruff("1,2,3\n"), ParseError);
    EXPECT_THROW(parse_rruff("1\n"), ParseError);
}

TEST(ParseRruff, PointsSortedAscending) {
    const auto r = parse_rruff("200,1\n100,2\n");
    EXPECT_EQ(r.points[0], (std::pair{100.0, 2.0}));
    EXPECT_EQ(r.points[1], (std::pair{200.0, 1.0}));
}

TEST(SerializeRruff, RoundTripRandomRecords) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 100; ++trial) {
        RruffRecord r;
        r.metadata["NAMES"] = "Species " + std::to_string(trial);
        r.metadata["RRUFFID"] = "R" + std::to_string(rng() % 100000);
        double x = u(rng);
        for (int i = 0; i < 50; ++i) {
            x += std::abs(u(rng)) * 1e-6 + 1e-9;
            r.points.emplace_back(x, u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20));
        }
        EXPECT_EQ(parse_rruff(serialize_rruff(r)), r);
    }
}

TEST(SerializeRruff, RoundTripRandomHeaders) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = fixture::random_rruff(rng);
        const auto text = serialize_rruff(r);
        const auto back = parse_rruff(text);
        EXPECT_EQ(back, r);
        EXPECT_EQ(serialize_rruff(back), text);
    }
}

TEST(SerializeRruff, EndsWithEndMarker) {
    RruffRecord r;
    r.points = {{1.0, 2.0}};
    const auto text = serialize_rruff(r);
    EXPECT_EQ(text.substr(text.size() - 7), "##END=\n");
}

TEST(RruffFile, WriteReadRoundTrip) {
    RruffRecord r;
    r.metadata["NAMES"] = "Gypsum";
    r.points = {{100.0, 0.5}, {101.5, 0.25}};
    const auto path = std::filesystem::temp_directory_path() / "raman_rruff_roundtrip.txt";
    write_rruff_file(path, r);
    EXPECT_EQ(read_rruff_file(path), r);
    std::filesystem::remove(path);
    EXPECT_THROW(read_rruff_file(path), Error);
}

TEST(RruffConversion, SpectrumRoundTrip) {
    RruffRecord r;
    r.metadata["NAMES"] = "Gypsum";
    r.points = {{100.0, 0.5}, {101.5, 0.25}};
    const auto s = to_spectrum(r);
    EXPECT_EQ(s.label, "Gypsum");
    EXPECT_EQ(to_record(s).points, r.points);
    r.points.push_back({101.5, 1.0});
    EXPECT_THROW(to_spectrum(r), InvalidArgument);
}
