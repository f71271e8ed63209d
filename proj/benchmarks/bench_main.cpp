#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "raman/baseline.hpp"
#include "raman/classic.hpp"
#include "raman/nn/model.hpp"
#include "raman/synth.hpp"

using namespace raman;

namespace {

std::vector<double> spectrum(std::size_t n) {
    SynthConfig c;
    c.classes = 2;
    c.per_class = 2;
    c.grid.points = n;
    return synth_dataset(c).raw.samples.front().features;
}

void BM_Whittaker(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto y = spectrum(n);
    const std::vector<double> w(n, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(whittaker_smooth(y, w, 1e5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Whittaker)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Estimator(benchmark::State& state, const char* name) {
    const auto y = spectrum(1024);
    const auto method = BaselineMethod::from_name(name);
    for (auto _ : state) benchmark::DoNotOptimize(method.estimate(y));
}
BENCHMARK_CAPTURE(BM_Estimator, asym_ls, "asym_ls");
BENCHMARK_CAPTURE(BM_Estimator, airpls, "airpls");
BENCHMARK_CAPTURE(BM_Estimator, modpoly, "modpoly");
BENCHMARK_CAPTURE(BM_Estimator, rolling_ball, "rolling_ball");
BENCHMARK_CAPTURE(BM_Estimator, rubber_band, "rubber_band");
BENCHMARK_CAPTURE(BM_Estimator, irls, "irls");
BENCHMARK_CAPTURE(BM_Estimator, robust_lr, "robust_lr");

void BM_Inference(benchmark::State& state) {
    const auto model = nn::build_model(1024, 20, nn::ArchSpec::pyramid(), 1);
    const auto x = spectrum(1024);
    for (auto _ : state) benchmark::DoNotOptimize(nn::predict(model, x));
}
BENCHMARK(BM_Inference)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
    SynthConfig c;
    c.classes = 50;
    c.per_class = 10;
    const auto d = synth_dataset(c).raw;
    ReferenceLibrary lib;
    lib.features.resize(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.grid.points));
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.grid.points; ++j)
            lib.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.samples[i].features[j];
    for (const auto& s : d.samples) lib.labels.push_back(s.class_index);
    lib.class_names = d.class_names;
    const auto& q = d.samples[3].features;
    for (auto _ : state) benchmark::DoNotOptimize(knn_predict(lib, q, 1));
}
BENCHMARK(BM_Knn);

}  // namespace

// The packaged benchmark_main archive carries LTO bytecode from another compiler build.
BENCHMARK_MAIN();
