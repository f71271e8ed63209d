#pragma once

#include <cstddef>
#include <cstdint>

#include "raman/dataset.hpp"

namespace raman {

struct SynthConfig {
    std::size_t classes = 20;
    std::size_t per_class = 10;
    double baseline_severity = 1.0;
    double noise = 0.01;
    std::uint64_t seed = 0;
    Grid grid{100.0, 1900.0, 512};
};

/// Paired variants with identical labels and sample order.
struct SynthDataset {
    LabeledDataset raw;
    LabeledDataset clean;
};

/// Each class is a fixed set of 3-6 Lorentzian peaks. Every sample jitters peak
/// positions, widths and heights, adds a random polynomial plus broad Gaussian
/// fluorescence baseline scaled by baseline_severity, and multiplicative noise.
/// `clean` is the same sample with the baseline removed. Both are min-max scaled.
SynthDataset synth_dataset(const SynthConfig& cfg);

}  // namespace raman
