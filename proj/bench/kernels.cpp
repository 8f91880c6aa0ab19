// Serial reference vs OpenMP kernels.

#include "shrinknet/eb_em.hpp"
#include "shrinknet/graph_sim.hpp"
#include "shrinknet/selection.hpp"

#include <benchmark/benchmark.h>

using namespace shrinknet;

namespace {

ExpressionMatrix data(Index p, Index n) {
  auto rng = make_stream(11, 0);
  const auto g = make_structure(GraphKind::band, p, {}, rng());
  const auto omega = sample_precision(g, 4.0, rng);
  return standardize(sample_mvn(omega, n, rng), true);
}

Execution mode(const benchmark::State& state) { return state.range(2) ? Execution::parallel : Execution::serial; }

void fit_sem_kernel(benchmark::State& state) {
  const auto m = data(state.range(0), state.range(1));
  EmConfig cfg;
  cfg.execution = mode(state);
  cfg.max_iter = 5;
  cfg.tol = 1e-12;
  for (auto _ : state) benchmark::DoNotOptimize(fit_sem(m, cfg));
  state.SetLabel(state.range(2) ? "parallel" : "serial");
}

void p0_kernel(benchmark::State& state) {
  const auto m = data(state.range(0), state.range(1));
  const auto ranking = rank_edges(kappa_scores(fit_sem(m)));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_p0(m, ranking, {}, mode(state)));
  state.SetLabel(state.range(2) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(fit_sem_kernel)->ArgsProduct({{50, 100}, {25, 100}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(p0_kernel)->ArgsProduct({{30, 50}, {100}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
