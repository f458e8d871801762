#include <benchmark/benchmark.h>

#include "vortex/asymptotics.hpp"
#include "vortex/euler_front.hpp"
#include "vortex/layer_profiles.hpp"
#include "vortex/scenario.hpp"
#include "vortex/viscous.hpp"

namespace {

using namespace vortex;

const Scenario& default_scenario() {
  static const Scenario sc = make_tapered_swirl_scenario();
  return sc;
}

struct Stages {
  Scenario sc = default_scenario();
  MassCoordinateMap map{sc};
  EulerSolution euler = solve_vortex_sheet_euler(sc);
  OuterSolution outer = to_lagrangian(
      euler, map, make_two_sided_grid(0.0, map.h(), map.x_max(), sc.grid.n_minus, sc.grid.n_plus));
  OuterTraces traces = extract_traces(outer);
  OuterCorrection corr = solve_outer_correction(outer, sc.front_jump_datum);
  CorrectionTraces corr_traces = extract_correction_traces(corr);
  LayerSet layers = build_layer_set(sc, traces, corr_traces);
};

const Stages& stages() {
  static const Stages st;
  return st;
}

void BM_EulerSolve(benchmark::State& state) {
  const Scenario& sc = default_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_vortex_sheet_euler(sc));
  }
}
BENCHMARK(BM_EulerSolve)->Unit(benchmark::kMillisecond);

void BM_LayerSet(benchmark::State& state) {
  const Stages& st = stages();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_layer_set(st.sc, st.traces, st.corr_traces));
  }
}
BENCHMARK(BM_LayerSet)->Unit(benchmark::kMillisecond);

void BM_ViscousMarch(benchmark::State& state) {
  const Stages& st = stages();
  const double eps = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_viscous(st.sc, st.map, eps));
  }
}
BENCHMARK(BM_ViscousMarch)->Unit(benchmark::kMillisecond);

void BM_CompositeSlice(benchmark::State& state) {
  const Stages& st = stages();
  const CompositeExpansion comp(st.sc, st.outer, &st.corr, st.layers, 1e-3, 1);
  std::vector<double> xs;
  for (int i = 0; i <= 2000; ++i) xs.push_back(st.map.x_max() * i / 2000.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(comp.slice(0.3, xs));
  }
}
BENCHMARK(BM_CompositeSlice)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
