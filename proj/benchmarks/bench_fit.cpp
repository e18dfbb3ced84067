#include <benchmark/benchmark.h>

#include "cholgauss/estimate.hpp"
#include "cholgauss/experiments.hpp"
#include "cholgauss/simgen.hpp"

using namespace cholgauss;

namespace {

void fit_fixed_smoothing(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const DataTable data = generate({.n = n, .k = k, .alpha = 1.0, .seed = 3});
    const ModelSpec spec = simulation_spec(k, true);
    for (auto _ : state) benchmark::DoNotOptimize(fit_pml(spec, data).loglik);
}

void fit_with_selection(benchmark::State& state) {
    const DataTable data = generate({.n = static_cast<std::size_t>(state.range(0)), .k = 3, .alpha = 1.0, .seed = 3});
    const ModelSpec spec = simulation_spec(3, true);
    for (auto _ : state) benchmark::DoNotOptimize(fit(spec, data).aic);
}

}  // namespace

BENCHMARK(fit_fixed_smoothing)->Args({500, 3})->Args({5000, 3})->Args({5000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(fit_with_selection)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);
