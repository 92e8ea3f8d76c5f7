// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>

#include "tvflow/grid.hpp"
#include "tvflow/noise.hpp"
#include "tvflow/regularization.hpp"
#include "tvflow/solver.hpp"
#include "tvflow/transport.hpp"

namespace {

using namespace tvflow;

ScalarField bump(const GridPtr& g) {
  return ScalarField::from_function(g, [](Vec2 p) { return std::exp(-(p.x * p.x + p.y * p.y) / 0.08); });
}

void BM_Gradient(benchmark::State& st) {
  const auto g = Grid::build(1.0, static_cast<int>(st.range(0)));
  const ScalarField u = bump(g);
  for (auto _ : st) benchmark::DoNotOptimize(gradient(u));
}
BENCHMARK(BM_Gradient)->Arg(64)->Arg(128)->Arg(256);

void BM_Divergence(benchmark::State& st) {
  const auto g = Grid::build(1.0, static_cast<int>(st.range(0)));
  const VectorField2 p = gradient(bump(g));
  for (auto _ : st) benchmark::DoNotOptimize(divergence(p));
}
BENCHMARK(BM_Divergence)->Arg(64)->Arg(128)->Arg(256);

void BM_GroupApply(benchmark::State& st) {
  const auto g = Grid::build(1.0, static_cast<int>(st.range(0)));
  const ScalarField u = bump(g);
  const TransportFieldSpec spec(0.3);
  for (auto _ : st) benchmark::DoNotOptimize(group_apply(u, spec, 0.7));
}
BENCHMARK(BM_GroupApply)->Arg(64)->Arg(128);

void BM_DivPsiTilde(benchmark::State& st) {
  const auto g = Grid::build(1.0, static_cast<int>(st.range(0)));
  const ScalarField u = bump(g);
  for (auto _ : st) benchmark::DoNotOptimize(div_psi_tilde(u, 0.1));
}
BENCHMARK(BM_DivPsiTilde)->Arg(64)->Arg(128);

void BM_ImplicitStep(benchmark::State& st) {
  const auto g = Grid::build(1.0, static_cast<int>(st.range(0)));
  const auto method = st.range(1) == 0 ? InnerSolver::Newton : InnerSolver::Picard;
  ImplicitTvStepper stepper(g, 0.1, 1e-3, 1e-10, 400, method);
  const ScalarField u = bump(g);
  for (auto _ : st) benchmark::DoNotOptimize(stepper.step(u));
  st.counters["inner_iterations"] = stepper.last_iterations();
}
BENCHMARK(BM_ImplicitStep)->Args({64, 0})->Args({64, 1})->Args({128, 0})->Unit(benchmark::kMillisecond);

void BM_SolveRescaled(benchmark::State& st) {
  const auto g = Grid::build(1.0, 64);
  SolverConfig cfg;
  cfg.grid = g;
  cfg.horizon = 0.05;
  const double omegas[] = {0.3, -0.18};
  cfg.transport = TransportSystem::from_omegas(omegas);
  const BrownianPath path = BrownianPath::sample(7, 2, cfg.horizon, cfg.dt);
  const ScalarField x = bump(g);
  for (auto _ : st) benchmark::DoNotOptimize(solve(x, path, cfg));
}
BENCHMARK(BM_SolveRescaled)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
