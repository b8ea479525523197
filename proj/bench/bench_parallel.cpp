#include <benchmark/benchmark.h>

#include "hazlab/crm.hpp"
#include "hazlab/experiments.hpp"
#include "hazlab/hazard.hpp"

namespace {

using namespace hazlab;

CrmRealization ou_realization(double T) {
  RngStream rng(11);
  TruncationPolicy policy;
  return sample_crm(GeneralizedGammaIntensity(0.0, 1.0), {0.0, T}, policy, rng);
}

void BM_QuadraticReference(benchmark::State& state) {
  const auto crm = ou_realization(static_cast<double>(state.range(0)));
  const auto k = KernelSpec::ornstein_uhlenbeck(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form_reference(k, crm.atoms, state.range(0)));
  state.counters["atoms"] = static_cast<double>(crm.atoms.size());
}

void BM_QuadraticParallel(benchmark::State& state) {
  const auto crm = ou_realization(static_cast<double>(state.range(0)));
  const auto k = KernelSpec::ornstein_uhlenbeck(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form_parallel(k, crm.atoms, state.range(0)));
}

void BM_QuadraticSweep(benchmark::State& state) {
  const auto crm = ou_realization(static_cast<double>(state.range(0)));
  const auto k = KernelSpec::ornstein_uhlenbeck(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form_sweep(k, crm.atoms, state.range(0)));
}

void BM_Replicates(benchmark::State& state) {
  ModelConfig m;
  const bool serial = state.range(0) == 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_prior_functionals(m, 100.0, 200, 1, 0, 1e-4, 1e-3, serial));
}

}  // namespace

BENCHMARK(BM_QuadraticReference)->Arg(20)->Arg(50);
BENCHMARK(BM_QuadraticParallel)->Arg(20)->Arg(50);
BENCHMARK(BM_QuadraticSweep)->Arg(20)->Arg(50)->Arg(500);
BENCHMARK(BM_Replicates)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
