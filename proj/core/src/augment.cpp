#include "raman/augment.hpp"

#include <cmath>
#include <cstdlib>

#include "raman/error.hpp"

namespace raman {

void AugmentConfig::validate() const {
    if (max_shift < 0) throw InvalidArgument("augment: max_shift must be >= 0");
    if (!(noise_scale >= 0.0)) throw InvalidArgument("augment: noise_scale must be >= 0");
    if (mixes_per_class < 0) throw InvalidArgument("augment: mixes_per_class must be >= 0");
    if (copies_per_sample < 0) throw InvalidArgument("augment: copies_per_sample must be >= 0");
}

std::vector<double> shift(std::span<const double> x, int offset) {
    const auto n = static_cast<long>(x.size());
    if (std::labs(offset) >= n)
        throw InvalidArgument("shift: |offset| " + std::to_string(offset) + " >= length " +
                              std::to_string(n));
    std::vector<double> out(x.size());
    for (long i = 0; i < n; ++i) {
        long src = i - offset;
        src = src < 0 ? 0 : (src >= n ? n - 1 : src);
        out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
    }
    return out;
}

std::vector<double> proportional_noise(std::span<const double> x, double noise_scale, Rng& rng) {
    if (!(noise_scale >= 0.0)) throw InvalidArgument("proportional_noise: noise_scale must be >= 0");
    std::vector<double> out(x.begin(), x.end());
    if (noise_scale == 0.0) return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v *= 1.0 + noise_scale * normal(rng);
    return out;
}

std::vector<double> mix(std::span<const std::vector<double>> spectra,
                        std::span<const double> coefficients) {
    if (spectra.size() < 2) throw InvalidArgument("mix: need at least 2 spectra");
    if (coefficients.size() != spectra.size())
        throw InvalidArgument("mix: coefficient count does not match spectrum count");
    const std::size_t len = spectra.front().size();
    double total = 0.0;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        if (spectra[s].size() != len) throw InvalidArgument("mix: spectra differ in length");
        if (!(coefficients[s] >= 0.0)) throw InvalidArgument("mix: coefficients must be >= 0");
        total += coefficients[s];
    }
    if (!(total > 0.0)) throw InvalidArgument("mix: coefficients sum to zero");
    std::vector<double> out(len, 0.0);
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        const double c = coefficients[s] / total;
        for (std::size_t i = 0; i < len; ++i) out[i] += c * spectra[s][i];
    }
    return out;
}

std::vector<double> mix(std::span<const std::vector<double>> spectra, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> coeffs(spectra.size());
    double total = 0.0;
    do {
        total = 0.0;
        for (double& c : coeffs) total += (c = unit(rng));
    } while (total == 0.0);
    return mix(spectra, coeffs);
}

LabeledDataset augment_dataset(const LabeledDataset& d, const AugmentConfig& cfg) {
    cfg.validate();
    LabeledDataset out = d;
    if (cfg.copies_per_sample == 0 && cfg.mixes_per_class == 0) return out;

    Rng rng(mix_seed(cfg.seed, 0xA11));
    for (const auto& s : d.samples) {
        const int max_shift = std::min<int>(cfg.max_shift, static_cast<int>(s.features.size()) - 1);
        std::uniform_int_distribution<int> offset(-max_shift, max_shift);
        for (int c = 0; c < cfg.copies_per_sample; ++c) {
            auto v = proportional_noise(shift(s.features, offset(rng)), cfg.noise_scale, rng);
            out.samples.push_back({std::move(v), s.class_index});
        }
    }
    if (cfg.mixes_per_class > 0) {
        std::vector<std::vector<std::vector<double>>> members(d.num_classes());
        for (const auto& s : d.samples) members[s.class_index].push_back(s.features);
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (members[k].size() < 2) continue;
            for (int m = 0; m < cfg.mixes_per_class; ++m)
                out.samples.push_back({mix(members[k], rng), k});
        }
    }
    out.recount();
    return out;
}

}  // namespace raman
