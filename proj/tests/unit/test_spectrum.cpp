#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "raman/error.hpp"
#include "raman/spectrum.hpp"

using namespace raman;

TEST(Grid, AxisEndsExactlyAtStop) {
    const Grid g{100.0, 1900.0, 1024};
    const auto axis = g.axis();
    ASSERT_EQ(axis.size(), 1024u);
    EXPECT_EQ(axis.front(), 100.0);
    EXPECT_EQ(axis.back(), 1900.0);
    EXPECT_NEAR(g.step(), 1800.0 / 1023.0, 1e-15);
}

TEST(Grid, RejectsDegenerateRanges) {
    EXPECT_THROW((Grid{5.0, 5.0, 10}.validate()), InvalidArgument);
    EXPECT_THROW((Grid{0.0, 1.0, 1}.validate()), InvalidArgument);
}

TEST(Spectrum, ValidateRejectsBadAxes) {
    EXPECT_THROW((Spectrum{{1.0, 1.0}, {0.0, 0.0}, {}}.validate()), InvalidArgument);
    EXPECT_THROW((Spectrum{{2.0, 1.0}, {0.0, 0.0}, {}}.validate()), InvalidArgument);
    EXPECT_THROW((Spectrum{{1.0, 2.0}, {0.0, NAN}, {}}.validate()), InvalidArgument);
    EXPECT_THROW((Spectrum{{1.0}, {0.0}, {}}.validate()), InvalidArgument);
    EXPECT_THROW((Spectrum{{1.0, 2.0}, {0.0}, {}}.validate()), InvalidArgument);
    EXPECT_NO_THROW((Spectrum{{1.0, 2.0}, {0.0, 1.0}, {}}.validate()));
}

TEST(Resample, IdentityOnMatchingGrid) {
    const Grid g{0.0, 9.0, 10};
    Spectrum s{g.axis(), {3, 1, 4, 1, 5, 9, 2, 6, 5, 3}, {}};
    EXPECT_EQ(resample(s, g), s.intensities);
}

TEST(Resample, LinearRampIsExact) {
    Spectrum s{{0.0, 10.0}, {0.0, 10.0}, {}};
    const auto out = resample(s, Grid{0.0, 10.0, 5});
    EXPECT_DOUBLE_EQ(out[1], 2.5);
}

TEST(Resample, OutsideSourceRangeIsZero) {
    Spectrum s{{0.0, 10.0}, {1.0, 1.0}, {}};
    const auto out = resample(s, Grid{0.0, 12.0, 7});
    EXPECT_EQ(out[5], 1.0);  // 10.0
    EXPECT_EQ(out[6], 0.0);  // 12.0
}

TEST(Resample, AffineIntensityExactOnRandomAxes) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> gap(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Spectrum s;
        double x = 50.0 * gap(rng);
        for (int i = 0; i < 200; ++i) {
            s.wavenumbers.push_back(x);
            s.intensities.push_back(2.5 - 0.75 * x);
            x += gap(rng);
        }
        const Grid g{s.wavenumbers.front(), s.wavenumbers.back(), 333};
        const auto out = resample(s, g);
        for (std::size_t i = 0; i < out.size(); ++i)
            EXPECT_NEAR(out[i], 2.5 - 0.75 * g.at(i), 1e-10 * (1.0 + std::abs(g.at(i))));
    }
}

TEST(Resample, RejectsMalformedSpectrum) {
    Spectrum s{{0.0, 0.0}, {1.0, 2.0}, {}};
    EXPECT_THROW(resample(s, Grid{}), InvalidArgument);
}

TEST(NormalizeMax, Examples) {
    EXPECT_EQ(normalize_max(std::vector<double>{2, 4, 8}), (std::vector<double>{0.25, 0.5, 1.0}));
    EXPECT_EQ(normalize_max(std::vector<double>(5, 1.0)), std::vector<double>(5, 1.0));
    EXPECT_EQ(normalize_max(std::vector<double>{0, 0, 5}), (std::vector<double>{0, 0, 1}));
    EXPECT_THROW(normalize_max(std::vector<double>{0, 0, 0}), InvalidArgument);
}

TEST(MinMaxScale, Examples) {
    EXPECT_EQ(min_max_scale(std::vector<double>{-1, 0, 1}), (std::vector<double>{0, 0.5, 1}));
    const std::vector<double> unit{0.0, 0.25, 1.0, 0.5};
    EXPECT_EQ(min_max_scale(unit), unit);
    EXPECT_EQ(min_max_scale(std::vector<double>{10, 30}), (std::vector<double>{0, 1}));
    EXPECT_THROW(min_max_scale(std::vector<double>{3, 3, 3}), InvalidArgument);
}
