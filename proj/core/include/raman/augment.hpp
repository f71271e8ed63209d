#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "raman/dataset.hpp"
#include "raman/rng.hpp"

namespace raman {

struct AugmentConfig {
    int max_shift = 3;
    double noise_scale = 0.05;
    int mixes_per_class = 0;
    int copies_per_sample = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// out[i] = x[i - offset], vacated positions take the nearest retained edge value.
std::vector<double> shift(std::span<const double> x, int offset);

/// out[i] = x[i] * (1 + noise_scale * n_i), n_i standard normal.
std::vector<double> proportional_noise(std::span<const double> x, double noise_scale, Rng& rng);

/// Convex combination with the given raw coefficients (normalized to sum 1).
std::vector<double> mix(std::span<const std::vector<double>> spectra,
                        std::span<const double> coefficients);

/// Convex combination with coefficients drawn uniform(0, 1) then normalized.
std::vector<double> mix(std::span<const std::vector<double>> spectra, Rng& rng);

/// Originals first, then copies_per_sample shifted+noised variants of each sample,
/// then mixes_per_class mixtures for every class with at least two samples.
LabeledDataset augment_dataset(const LabeledDataset& d, const AugmentConfig& cfg);

}  // namespace raman
