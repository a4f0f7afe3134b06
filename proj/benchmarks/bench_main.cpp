#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "fluctuate/bhpgf.hpp"
#include "fluctuate/lddist.hpp"
#include "fluctuate/random.hpp"
#include "fluctuate/simulate.hpp"

namespace {

using namespace fluctuate;

ProliferationModel binary(LifetimeDistribution life) { return {OffspringDistribution::binary_split(), std::move(life)}; }

std::vector<cplx> circle(std::size_t n, double radius) {
  std::vector<cplx> pts(n);
  for (std::size_t j = 0; j < n; ++j) pts[j] = std::polar(radius, 6.283185307179586 * double(j) / double(n));
  return pts;
}

void BM_RenewalSolve(benchmark::State& state) {
  const auto model = binary(KendallGamma{2, 1.0});
  const auto pts = circle(static_cast<std::size_t>(state.range(0)), 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(solve_renewal(model, pts, 1e-2, 30.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenewalSolve)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PgfEvaluator(benchmark::State& state) {
  PgfNumerics num;
  num.method = state.range(1) ? PgfMethod::Volterra : PgfMethod::PhaseType;
  const PgfEvaluator ev(binary(KendallGamma{2, 1.0}), num);
  const auto pts = circle(static_cast<std::size_t>(state.range(0)), 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(ev.one_minus_g(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PgfEvaluator)->Args({1024, 0})->Args({1024, 1})->Unit(benchmark::kMillisecond);

void BM_PmfFamily(benchmark::State& state) {
  const PgfEvaluator ev(binary(Exponential{1.0}));
  const auto rmax = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(LddFamily(ev, rmax).pmf(4.0));
}
BENCHMARK(BM_PmfFamily)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_PmfRecursion(benchmark::State& state) {
  const LddFamily family(PgfEvaluator(binary(Exponential{1.0})), 5000);
  const auto rmax = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(family.pmf_recursion(4.0, rmax));
}
BENCHMARK(BM_PmfRecursion)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_Simulation(benchmark::State& state) {
  const bool markov = state.range(0) == 0;
  const LifetimeDistribution life = markov ? LifetimeDistribution(Exponential{1.0})
                                           : LifetimeDistribution(KendallGamma{2, 1.0});
  SimConfig cfg{{OffspringDistribution::binary_split(), life}, {OffspringDistribution::binary_split(), life}};
  cfg.rho = 1e-4;
  cfg.max_cells = 100000;
  std::uint64_t culture = 0;
  for (auto _ : state) {
    Rng rng = substream(7, culture++);
    benchmark::DoNotOptimize(grow_culture(cfg, rng));
  }
}
BENCHMARK(BM_Simulation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
