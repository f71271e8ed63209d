#include "raman/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "raman/error.hpp"
#include "raman/rng.hpp"
#include "raman/spectrum.hpp"

namespace raman {
namespace {

// Per-sample variation, in cm^-1 for positions and relative units for heights.
constexpr double kGlobalShift = 4.0;
constexpr double kPeakShift = 2.0;
constexpr double kWidthJitter = 0.1;
constexpr double kHeightJitter = 0.15;

struct Peak {
    double center;
    double width;  // half width at half maximum, cm^-1
    double height;
};

std::vector<Peak> draw_peaks(Rng& rng, int n, double lo, double hi) {
    const double span = hi - lo;
    std::uniform_real_distribution<double> center(lo + 0.05 * span, hi - 0.05 * span);
    std::uniform_real_distribution<double> width(6.0, 20.0);
    std::uniform_real_distribution<double> height(0.3, 1.0);
    std::vector<Peak> peaks(static_cast<std::size_t>(n));
    for (auto& p : peaks) p = {center(rng), width(rng), height(rng)};
    return peaks;
}

std::vector<Peak> class_peaks(std::uint64_t seed, std::size_t c, double lo, double hi) {
    Rng rng(mix_seed(seed, 0xC1A5500000ull + c));
    std::uniform_int_distribution<int> count(3, 6);
    return draw_peaks(rng, count(rng), lo, hi);
}

}  // namespace

SynthDataset synth_dataset(const SynthConfig& cfg) {
    if (cfg.classes < 2) throw InvalidArgument("synth: classes must be >= 2");
    if (cfg.per_class < 2) throw InvalidArgument("synth: per_class must be >= 2");
    if (!(cfg.baseline_severity >= 0.0) || !(cfg.noise >= 0.0))
        throw InvalidArgument("synth: severity and noise must be >= 0");
    cfg.grid.validate();

    const auto axis = cfg.grid.axis();
    const std::size_t n = axis.size();
    const double lo = cfg.grid.start;
    const double span = cfg.grid.stop - cfg.grid.start;

    SynthDataset out;
    for (auto* d : {&out.raw, &out.clean}) {
        d->grid = cfg.grid;
        for (std::size_t c = 0; c < cfg.classes; ++c) {
            char name[32];
            std::snprintf(name, sizeof name, "synth_%02zu", c);
            d->class_names.emplace_back(name);
        }
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        const auto peaks = class_peaks(cfg.seed, c, cfg.grid.start, cfg.grid.stop);
        for (std::size_t s = 0; s < cfg.per_class; ++s) {
            Rng rng(mix_seed(cfg.seed, 0x5A3B1E0000000ull + c * 0x10000ull + s));

            std::vector<double> signal(n, 0.0);
            const double global_shift = kGlobalShift * gauss(rng);
            for (const auto& p : peaks) {
                const double center = p.center + global_shift + kPeakShift * gauss(rng);
                const double width = p.width * std::max(0.5, 1.0 + kWidthJitter * gauss(rng));
                const double height = p.height * std::max(0.2, 1.0 + kHeightJitter * gauss(rng));
                for (std::size_t i = 0; i < n; ++i) {
                    const double u = (axis[i] - center) / width;
                    signal[i] += height / (1.0 + u * u);
                }
            }

            // Fluorescence-like background: low-order polynomial plus a broad Gaussian hump.
            const double a0 = unit(rng);
            const double a1 = 2.0 * unit(rng) - 1.0;
            const double a2 = 2.0 * unit(rng) - 1.0;
            const double a3 = 2.0 * unit(rng) - 1.0;
            const double hump = 0.5 + 2.5 * unit(rng);
            const double hump_center = lo + span * (0.2 + 1.0 * unit(rng));
            const double hump_width = span * (0.25 + 0.5 * unit(rng));
            std::vector<double> background(n);
            double bmin = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = (axis[i] - lo) / span;
                const double g = (axis[i] - hump_center) / hump_width;
                background[i] = a0 + t * (a1 + t * (a2 + t * a3)) + hump * std::exp(-0.5 * g * g);
                bmin = i == 0 ? background[i] : std::min(bmin, background[i]);
            }

            std::vector<double> raw(n), clean(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double factor = 1.0 + cfg.noise * gauss(rng);
                const double b = cfg.baseline_severity * (background[i] - bmin);
                raw[i] = (signal[i] + b) * factor;
                clean[i] = signal[i] * factor;
            }
            out.raw.samples.push_back({min_max_scale(raw), c});
            out.clean.samples.push_back({min_max_scale(clean), c});
        }
    }
    out.raw.recount();
    out.clean.recount();
    return out;
}

}  // namespace raman
