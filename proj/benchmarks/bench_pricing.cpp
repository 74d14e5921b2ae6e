#include <benchmark/benchmark.h>

#include "cover/lattice.hpp"
#include "cover/mc_oracle.hpp"
#include "cover/pricing.hpp"
#include "cover/replication.hpp"

using namespace cover;

namespace {

MarketSpec market_of(Eigen::Index n) {
    MarketSpec spec;
    spec.mu = Vector::Constant(n, 0.05);
    spec.sigma = Vector::LinSpaced(n, 0.15, 0.45);
    spec.corr = Matrix::Constant(n, n, 0.2);
    spec.corr.diagonal().setOnes();
    spec.rate = 0.02;
    spec.s0 = Vector::Ones(n);
    return spec;
}

}  // namespace

static void PriceLevered(benchmark::State& state) {
    const Market m(market_of(state.range(0)));
    const Vector s = Vector::Constant(state.range(0), 1.1);
    for (auto _ : state) benchmark::DoNotOptimize(price_levered(m, s, 1.0, 3.0));
}
BENCHMARK(PriceLevered)->Arg(1)->Arg(3)->Arg(10)->Arg(50);

static void PriceUnlevered(benchmark::State& state) {
    const Market m(market_of(1));
    const Vector s = Vector::Constant(1, 1.1);
    for (auto _ : state) benchmark::DoNotOptimize(price_unlevered(m, s, 1.0, 3.0));
}
BENCHMARK(PriceUnlevered);

static void Greeks(benchmark::State& state) {
    const Market m(market_of(1));
    for (auto _ : state) benchmark::DoNotOptimize(greeks(m, 1.1, 1.0, 3.0));
}
BENCHMARK(Greeks);

static void ImpliedVols(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(implied_vols(1.5, 105.0, 100.0, 0.5, 1.0, 0.03));
}
BENCHMARK(ImpliedVols);

static void LatticeClosedSum(benchmark::State& state) {
    const LatticeSpec s = LatticeSpec::crr(0.3, 1.0, 0.02, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(lattice_price({0, 0}, s, Mode::unlevered));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(LatticeClosedSum)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

static void LatticeBackwardInduction(benchmark::State& state) {
    const LatticeSpec s = LatticeSpec::crr(0.3, 1.0, 0.02, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(backward_induction(s, Mode::levered));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(LatticeBackwardInduction)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void MonteCarlo(benchmark::State& state) {
    const Market m(market_of(1));
    const Vector s = Vector::Constant(1, 1.1);
    for (auto _ : state) benchmark::DoNotOptimize(mc_price(m, s, 1.0, 3.0, Mode::levered, static_cast<std::size_t>(state.range(0)), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(MonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void HedgePath(benchmark::State& state) {
    const Market m(market_of(2));
    const PricePath path = simulate_path(m, 2.0, static_cast<std::size_t>(state.range(0)), Measure::physical, 1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(hedge_path(m, path, 1.0, 2.0, Mode::levered));
}
BENCHMARK(HedgePath)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
