#include <vector>

#include <benchmark/benchmark.h>

#include "kvar/measures.hpp"
#include "kvar/random.hpp"
#include "kvar/transport.hpp"

namespace {

kvar::EmpiricalMeasure cube_cloud(std::size_t k, std::size_t d, kvar::Stream& s) {
    std::vector<double> coords(k * d);
    for (double& v : coords) {
        v = s.uniform();
    }
    return kvar::EmpiricalMeasure(d, std::move(coords));
}

void BM_W2sqCube(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto d = static_cast<std::size_t>(state.range(1));
    kvar::Stream s(1);
    const auto x = cube_cloud(k, d, s);
    const auto y = cube_cloud(k, d, s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kvar::w2sq(x, y).cost);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W2sqCube)
    ->ArgsProduct({{64, 256, 1024}, {2, 10}})
    ->Unit(benchmark::kMillisecond);

void BM_W2sqSorted(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    kvar::Stream s(2);
    const auto x = cube_cloud(k, 1, s);
    const auto y = cube_cloud(k, 1, s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kvar::w2sq(x, y).cost);
    }
}
BENCHMARK(BM_W2sqSorted)->RangeMultiplier(8)->Range(64, 32768);

void BM_AssignmentUniformCosts(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    kvar::Stream s(3);
    std::vector<double> cost(n * n);
    for (double& c : cost) {
        c = s.uniform();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(kvar::solve_linear_assignment(cost, n));
    }
}
BENCHMARK(BM_AssignmentUniformCosts)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMicrosecond);

}  // namespace
