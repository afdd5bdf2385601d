#include <benchmark/benchmark.h>

#include "kmlocal/estimators.hpp"
#include "kmlocal/grid.hpp"
#include "kmlocal/ingest.hpp"
#include "kmlocal/scada_fixture.hpp"
#include "kmlocal/simulate.hpp"

using namespace kmlocal;

namespace {

const SampledSeries& ou_path() {
  static const SampledSeries x = euler_maruyama(builtin_process("ou")).channels[0];
  return x;
}

void BM_EulerMaruyama(benchmark::State& state) {
  auto spec = builtin_process("coupled2d");
  spec.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(euler_maruyama(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EulerMaruyama)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_NadarayaWatson(benchmark::State& state) {
  const auto& x = ou_path();
  const ConditionSeries cond({"x"}, {x});
  const auto grid = percentile_grid(cond, 50);
  const auto kernel = KernelSpec::uniform(KernelFamily::Gaussian, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(conditional_moment_nw(x, cond, grid, kernel, 1, 1));
}
BENCHMARK(BM_NadarayaWatson)->Unit(benchmark::kMillisecond);

// Gaussian scans every sample; compact kernels go through the support index.
void BM_LocalFit(benchmark::State& state) {
  const auto& x = ou_path();
  const ConditionSeries cond({"x"}, {x});
  const auto grid = percentile_grid(cond, 50);
  const auto family = static_cast<KernelFamily>(state.range(0));
  const auto kernel = KernelSpec::uniform(family, 0.25);
  const auto basis = make_polynomial_basis(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_moment_fit(x, cond, grid, kernel, basis, 1, 1));
  }
  state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_LocalFit)
    ->Arg(static_cast<int>(KernelFamily::Gaussian))
    ->Arg(static_cast<int>(KernelFamily::Epanechnikov))
    ->Unit(benchmark::kMillisecond);

void BM_GlobalFit(benchmark::State& state) {
  const auto& x = ou_path();
  const auto basis = make_polynomial_basis(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(global_moment_fit(x, basis, 1, 1));
}
BENCHMARK(BM_GlobalFit)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Aggregate(benchmark::State& state) {
  ScadaFixtureSpec spec;
  spec.days = 7.0;
  const auto records = generate_scada(spec);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(records, 10.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(records.size()));
}
BENCHMARK(BM_Aggregate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
