#include <benchmark/benchmark.h>

#include "kvar/kvariance.hpp"
#include "kvar/measures.hpp"

namespace {

// Trials per second of the full estimator, one worker thread.
void run(benchmark::State& state, const kvar::MeasureSpec& spec) {
    kvar::EstimateOptions options;
    options.k = static_cast<std::size_t>(state.range(0));
    options.trials = 16;
    options.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kvar::estimate_kvar(spec, options).estimate);
        ++options.master_seed;
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(options.trials));
}

void BM_EstimateUniform01(benchmark::State& state) { run(state, kvar::family::Uniform01{}); }
BENCHMARK(BM_EstimateUniform01)->Arg(10)->Arg(1000);

void BM_EstimateGmm(benchmark::State& state) { run(state, kvar::family::GaussianMixtureGx{0.95, 5}); }
BENCHMARK(BM_EstimateGmm)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EstimateLowRank(benchmark::State& state) { run(state, kvar::family::LowRankGaussian{6, 200}); }
BENCHMARK(BM_EstimateLowRank)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
