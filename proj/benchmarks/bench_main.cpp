#include <benchmark/benchmark.h>

#include "mflqg/mflqg.hpp"

using namespace mflqg;

static void BM_SolveP(benchmark::State& state) {
  const ModelParams p = builtin_example_params(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_P(p, p.grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveP)->Arg(250)->Arg(1000)->Arg(4000)->Complexity();

static void BM_SolveCC(benchmark::State& state) {
  const ModelParams p = builtin_example_params(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cc(p));
}
BENCHMARK(BM_SolveCC)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SimulateDecentralized(benchmark::State& state) {
  const ModelParams p = builtin_example_params(1000);
  const CCResult r = solve_cc(p);
  const NoiseBank noise(1, p.grid.dt());
  SimOptions o;
  o.paths = 1;
  o.threads = 1;
  o.store = StoreMode::Never;
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_decentralized(p, r.law, N, noise, o));
  state.SetItemsProcessed(state.iterations() * N * p.grid.steps());
}
BENCHMARK(BM_SimulateDecentralized)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Oracle(benchmark::State& state) {
  const ModelParams p = builtin_example_params(500);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_oracle(p, N, p.grid));
}
BENCHMARK(BM_Oracle)->Arg(2)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Philox(benchmark::State& state) {
  const NoiseBank noise(7, 1e-3);
  std::uint32_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(noise.increment(0, 1, step++));
}
BENCHMARK(BM_Philox);
BENCHMARK_MAIN();
