// Microbenchmarks for the hot loops: one backward time step (continuation
// plus obstacle fixed point), the intervention operator alone, and
// simulated paths per second.

#include <benchmark/benchmark.h>

#include <vector>

#include "qvigame/grid.hpp"
#include "qvigame/operators.hpp"
#include "qvigame/policy.hpp"
#include "qvigame/simulator.hpp"
#include "qvigame/solver.hpp"

using namespace qvigame;

namespace {

ProblemSpec spec_1d() {
  ProblemSpec s;
  s.dim = 1;
  s.horizon = 1.0;
  s.diffusion.scale = {0.5};
  s.running_gain.terms.push_back({GainFamily::Bump, 3.0, {0.0}, 0.25});
  s.terminal_gain.terms.push_back({GainFamily::Hat, 1.0, {0.0}, 1.0});
  s.cost_I = {0.3, 1.2};
  s.cost_II = {0.15, 1.1};
  s.actions_I = {{ConeFamily::Orthant, {1.0}}, {{0.25}, {0.5}}};
  s.actions_II = {{ConeFamily::Orthant, {-1.0}}, {{-0.25}, {-0.5}}};
  return s;
}

GridRequest request(std::size_t nodes) {
  GridRequest r;
  r.lower = {-2.0};
  r.upper = {2.0};
  r.nodes = {nodes};
  return r;
}

void BM_TimeStep(benchmark::State& state) {
  const ProblemSpec spec = spec_1d();
  const Grid grid = build_grid(spec, request(static_cast<std::size_t>(state.range(0))));
  const QviScheme scheme(spec, grid);
  std::vector<double> next(grid.node_count());
  for (std::size_t p = 0; p < next.size(); ++p) next[p] = spec.terminal(grid.point(p));
  std::vector<double> v_cont(next.size());
  for (auto _ : state) {
    scheme.continuation(next, 0, v_cont);
    auto fp = scheme.obstacle_fixed_point(v_cont, v_cont, 0.0, 1e-9, 200);
    benchmark::DoNotOptimize(fp.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.node_count()));
}
BENCHMARK(BM_TimeStep)->Arg(101)->Arg(401)->Arg(1601);

void BM_InterventionInf(benchmark::State& state) {
  const ProblemSpec spec = spec_1d();
  const Grid grid = build_grid(spec, request(static_cast<std::size_t>(state.range(0))));
  const InterventionOperator op(spec, grid, Player::II);
  std::vector<double> v(grid.node_count(), 1.0);
  std::vector<double> out(v.size());
  const auto costs = op.costs(0.0);
  for (auto _ : state) {
    op.apply(v, costs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.node_count()));
}
BENCHMARK(BM_InterventionInf)->Arg(401)->Arg(1601);

void BM_SimulatePaths(benchmark::State& state) {
  const ProblemSpec spec = spec_1d();
  GridRequest r = request(101);
  const Grid grid = build_grid(spec, r);
  const SolveResult result = solve_backward(spec, grid, {});
  const PolicyMap policy = extract_policy(result, spec, grid, 1e-8);
  SimConfig cfg;
  cfg.paths = static_cast<std::size_t>(state.range(0));
  cfg.x0 = {0.0};
  cfg.workers = 1;
  for (auto _ : state) {
    auto rep = simulate(spec, grid, result, policy, cfg);
    benchmark::DoNotOptimize(rep.J_mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.paths));
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
