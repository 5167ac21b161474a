#include <benchmark/benchmark.h>

#include "ale2fluid/scenarios.hpp"

using namespace ale2fluid;

namespace {

RunConfig gravity(int nx) {
  RunConfig c = default_config(ScenarioKind::GravityRelaxation);
  c.nx = nx;
  c.ny = nx / 2;
  return c;
}

MeshVelocity still(const Mesh& mesh) {
  MeshVelocity mv;
  mv.direction = mesh.topology().direction;
  mv.w.assign(mesh.num_nodes(), 0.0);
  return mv;
}

void BM_AssembleMomentum(benchmark::State& bs) {
  const RunConfig c = gravity(static_cast<int>(bs.range(0)));
  const Mesh mesh = build_scenario_mesh(c);
  const State s = initial_state(c, mesh);
  const MeshVelocity w = still(mesh);
  for (auto _ : bs) {
    benchmark::DoNotOptimize(assemble_momentum_system(s, mesh, w, c.params, c.scheme));
  }
}
BENCHMARK(BM_AssembleMomentum)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_DirectSolve(benchmark::State& bs) {
  const RunConfig c = gravity(static_cast<int>(bs.range(0)));
  const Mesh mesh = build_scenario_mesh(c);
  const State s = initial_state(c, mesh);
  const MomentumSystem sys = assemble_momentum_system(s, mesh, still(mesh), c.params, c.scheme);
  for (auto _ : bs) benchmark::DoNotOptimize(solve_direct(sys.matrix, sys.rhs));
}
BENCHMARK(BM_DirectSolve)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& bs) {
  RunConfig c = gravity(40);
  c.scheme.scheme = static_cast<MotionScheme>(bs.range(0));
  const Mesh mesh = build_scenario_mesh(c);
  const State s = initial_state(c, mesh);
  const State warm = step(s, nullptr, c.params, c.scheme).state;
  for (auto _ : bs) benchmark::DoNotOptimize(step(warm, &s, c.params, c.scheme));
}
BENCHMARK(BM_Step)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
