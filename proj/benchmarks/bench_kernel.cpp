#include <benchmark/benchmark.h>

#include "cholgauss/kernel.hpp"
#include "cholgauss/layout.hpp"
#include "cholgauss/random.hpp"

#include <memory>
#include <vector>

using namespace cholgauss;

namespace {

struct Row {
    std::shared_ptr<const ParamLayout> layout;
    std::vector<double> eta;
    std::vector<double> y;
};

Row make_row(Family family, std::size_t k) {
    Row r{std::make_shared<const ParamLayout>(family, k), {}, {}};
    Rng rng(7);
    std::normal_distribution<double> n;
    r.eta.resize(r.layout->size());
    for (std::size_t p = 0; p < r.eta.size(); ++p)
        r.eta[p] = (*r.layout)[p].role == ParamRole::mean ? n(rng) : 0.3 * n(rng);
    r.y.resize(k);
    for (double& v : r.y) v = n(rng);
    return r;
}

void loglik(benchmark::State& state, Family family) {
    const Row r = make_row(family, static_cast<std::size_t>(state.range(0)));
    const FamilyKernel kernel(r.layout);
    KernelWorkspace ws = kernel.workspace();
    for (auto _ : state) benchmark::DoNotOptimize(kernel.loglik(r.eta, r.y, ws));
}

// One sweep over every predictor coordinate of a row.
void coordinates(benchmark::State& state, Family family) {
    const Row r = make_row(family, static_cast<std::size_t>(state.range(0)));
    const FamilyKernel kernel(r.layout);
    KernelWorkspace ws = kernel.workspace();
    for (auto _ : state) {
        for (std::size_t p = 0; p < r.layout->size(); ++p) benchmark::DoNotOptimize(kernel.coordinate(r.eta, r.y, p, ws));
    }
    state.counters["coords"] = static_cast<double>(r.layout->size());
}

}  // namespace

BENCHMARK_CAPTURE(loglik, basic, Family::basic_chol)->Arg(3)->Arg(10)->Arg(15);
BENCHMARK_CAPTURE(loglik, modified, Family::modified_chol)->Arg(3)->Arg(10)->Arg(15);
BENCHMARK_CAPTURE(loglik, const_corr, Family::const_corr)->Arg(3)->Arg(10);
BENCHMARK_CAPTURE(coordinates, basic, Family::basic_chol)->Arg(3)->Arg(10)->Arg(15);
BENCHMARK_CAPTURE(coordinates, modified, Family::modified_chol)->Arg(3)->Arg(10)->Arg(15);
BENCHMARK_CAPTURE(coordinates, ar1, Family::ar1)->Arg(3)->Arg(10);
