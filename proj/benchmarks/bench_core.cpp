#include <benchmark/benchmark.h>

#include "dualcast/experiment.hpp"
#include "dualcast/oracle.hpp"
#include "dualcast/simulate.hpp"

namespace {

using namespace dualcast;

ProblemInstance identical_instance(int n) {
  return build_instance(preset_multi_user(n));
}

void BM_Demand(benchmark::State& state) {
  const UserProfile user = make_log_user(0, 20.0, 1.0, 0.0, 4.0);
  double p = 11.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(demand(user, p));
  }
}
BENCHMARK(BM_Demand);

void BM_DualGradient(benchmark::State& state) {
  const ProblemInstance instance =
      identical_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_gradient(instance, 11.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DualGradient)->Arg(10)->Arg(100)->Arg(1000);

void BM_PresetRun(benchmark::State& state) {
  const ProblemInstance instance =
      identical_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run(instance, 30.0, StepSizePolicy::feasible_optimal()));
  }
}
BENCHMARK(BM_PresetRun)->Arg(2)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_OracleSolve(benchmark::State& state) {
  const ProblemInstance instance =
      identical_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(instance));
  }
}
BENCHMARK(BM_OracleSolve)->Arg(2)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
