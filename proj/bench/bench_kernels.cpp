// Serial reference against the OpenMP kernels. On a single core the two should match closely;
// the parallel variants pay off with more cores.

#include <benchmark/benchmark.h>

#include <vector>

#include "adjwalk/ensemble.hpp"
#include "adjwalk/hydro.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"

using namespace adjwalk;

namespace {

void scheme_rhs_bench(benchmark::State& state, bool parallel) {
  const int N = static_cast<int>(state.range(0));
  const ModelParams p(N, 0.1);
  const SchemeKind kind{SchemeVariant::X, std::nullopt};
  std::vector<double> f(static_cast<std::size_t>(N + 1)), out(f.size()), scratch(f.size());
  for (int k = 0; k <= N; ++k) f[static_cast<std::size_t>(k)] = lax_solution(static_cast<double>(k) / N, 1.0) + 1e-3;
  for (auto _ : state) {
    scheme_rhs_into(kind, f, p, out, scratch, parallel);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * N);
}

void BM_SchemeRhsSerial(benchmark::State& state) { scheme_rhs_bench(state, false); }
void BM_SchemeRhsParallel(benchmark::State& state) { scheme_rhs_bench(state, true); }

auto ensemble_job(const SiteKernel& kernel) {
  return [&kernel](std::size_t i) {
    Rng rng = seed_stream(7, i);
    return simulate_X(kernel, max_configuration(kernel.params().N()), 200.0, rng)[1];
  };
}

void BM_EnsembleSerial(benchmark::State& state) {
  const SiteKernel kernel(ModelParams(64, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble_serial(static_cast<std::size_t>(state.range(0)), ensemble_job(kernel)));
}

void BM_EnsembleParallel(benchmark::State& state) {
  const SiteKernel kernel(ModelParams(64, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(static_cast<std::size_t>(state.range(0)), ensemble_job(kernel)));
}

}  // namespace

BENCHMARK(BM_SchemeRhsSerial)->Arg(512)->Arg(4096)->Arg(65536);
BENCHMARK(BM_SchemeRhsParallel)->Arg(512)->Arg(4096)->Arg(65536);
BENCHMARK(BM_EnsembleSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
