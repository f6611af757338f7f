#include <benchmark/benchmark.h>

#include "planloc/a_graph.hpp"
#include "planloc/matcher.hpp"
#include "planloc/plans.hpp"
#include "planloc/scenario.hpp"

using namespace planloc;

namespace {

ScenarioConfig asym5(std::uint64_t seed) {
  SimConfig sim;
  sim.seed = seed;
  return make_scenario("asym5", fixture_plan("asym5"), sim, TourSpec{"R1", 0});
}

// S-graph after a whole asym5 traversal, built once.
const SGraph& traversed() {
  static const SGraph s = run_scenario(asym5(1), false).sgraph;
  return s;
}

void BM_BuildAGraph(benchmark::State& state) {
  const FloorPlan plan = generate_random_plan(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(build_a_graph(plan));
}
BENCHMARK(BM_BuildAGraph)->Arg(5)->Arg(10)->Arg(20);

void BM_OptimizeSGraph(benchmark::State& state) {
  const SGraph& base = traversed();
  for (auto _ : state) {
    state.PauseTiming();
    FactorGraph g = base.graph();
    // Knock every keyframe off its optimum.
    for (VariableId kf : base.keyframes()) {
      Eigen::VectorXd v = g.value(kf);
      v(0) += 0.05;
      g.set_value(kf, v);
    }
    state.ResumeTiming();
    benchmark::DoNotOptimize(optimize(g));
  }
}
BENCHMARK(BM_OptimizeSGraph)->Unit(benchmark::kMillisecond);

void BM_MatchAsym5(benchmark::State& state) {
  const AGraph a = build_a_graph(fixture_plan("asym5"));
  const SGraph& s = traversed();
  for (auto _ : state) benchmark::DoNotOptimize(match(a.graph, s.graph()));
}
BENCHMARK(BM_MatchAsym5)->Unit(benchmark::kMicrosecond);

void BM_MatchRandomPlan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GeneratorOptions options;
  options.distinct_dimensions = false;
  const FloorPlan plan = generate_random_plan(n, 5, options);
  SimConfig sim;
  sim.seed = 1;
  const SGraph s = run_scenario(make_scenario("random", plan, sim, TourSpec{plan.rooms.front().id, 0}),
                                false)
                       .sgraph;
  const AGraph a = build_a_graph(plan);
  for (auto _ : state) benchmark::DoNotOptimize(match(a.graph, s.graph()));
  state.counters["s_rooms"] = static_cast<double>(s.room_planes().size());
}
BENCHMARK(BM_MatchRandomPlan)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SimulateStep(benchmark::State& state) {
  const ScenarioConfig c = asym5(1);
  Simulator sim(c.plan, c.sim);
  for (auto _ : state) {
    if (sim.done()) {
      state.PauseTiming();
      sim = Simulator(c.plan, c.sim);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sim.step());
  }
}
BENCHMARK(BM_SimulateStep)->Unit(benchmark::kMicrosecond);

void BM_RunScenario(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(asym5(++seed)));
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond)->Iterations(5);

}  // namespace

BENCHMARK_MAIN();
