// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"
#include "tvflow/error.hpp"
#include "tvflow/regularization.hpp"
#include "tvflow/solver.hpp"
#include "tvflow/verify.hpp"

namespace {

using namespace tvflow;

ScalarField cone(const GridPtr& g) {
  return ScalarField::from_function(g, [](Vec2 p) { return std::max(0.0, 1.0 - norm(p) / 0.6); });
}

ScalarField bump(const GridPtr& g) {
  return ScalarField::from_function(g, [](Vec2 p) {
    const Vec2 d = p - Vec2{0.3, 0.1};
    return std::exp(-dot(d, d) / 0.08);
  });
}

SolverConfig config(const GridPtr& g, double horizon, double dt = 1e-3, double lambda = 0.1) {
  SolverConfig c;
  c.grid = g;
  c.horizon = horizon;
  c.dt = dt;
  c.lambda = lambda;
  const double w[] = {0.3, -0.18};
  c.transport = TransportSystem::from_omegas(w);
  return c;
}

double step_residual(const ScalarField& out, const ScalarField& w, double dt, double lambda) {
  ScalarField r = out - w;
  r.axpy(-dt, div_psi_tilde(out, lambda));
  return l2_norm(r) / l2_norm(w);
}

TEST(SolverConfig, Validation) {
  const auto g = Grid::build(1.0, 16);
  SolverConfig c = config(g, 0.1);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.steps(), 100);
  auto bad = [&](auto mutate) {
    SolverConfig d = c;
    mutate(d);
    EXPECT_THROW(d.validate(), std::invalid_argument);
  };
  bad([](SolverConfig& d) { d.lambda = 0.0; });
  bad([](SolverConfig& d) { d.lambda = 1.5; });
  bad([](SolverConfig& d) { d.dt = 0.2; });
  bad([](SolverConfig& d) { d.dt = 0.003; });
  bad([](SolverConfig& d) { d.inner_tol = 1e-6; });
  bad([](SolverConfig& d) { d.inner_max = 0; });
  bad([](SolverConfig& d) { d.state_stride = 0; });
  bad([](SolverConfig& d) { d.grid.reset(); });
}

TEST(Enums, RoundTrip) {
  for (auto s : {Scheme::Rescaled, Scheme::Ito}) EXPECT_EQ(scheme_from_string(to_string(s)), s);
  for (auto m : {FrameMode::Equivariant, FrameMode::Interpolate}) EXPECT_EQ(frame_mode_from_string(to_string(m)), m);
  for (auto m : {InnerSolver::Newton, InnerSolver::Picard}) EXPECT_EQ(inner_solver_from_string(to_string(m)), m);
  EXPECT_THROW(scheme_from_string("euler"), std::invalid_argument);
}

TEST(Stepper, ZeroIsFixed) {
  const auto g = Grid::build(1.0, 16);
  ImplicitTvStepper s(g, 0.1, 1e-3);
  EXPECT_EQ(s.step(ScalarField(g)).max_abs(), 0.0);
}

TEST(Stepper, SolvesTheImplicitEquation) {
  std::mt19937_64 rng(41);
  const auto g = Grid::build(1.0, 32);
  for (double lam : {0.5, 0.1, 0.02}) {
    for (double dt : {1e-4, 1e-3, 1e-2}) {
      for (auto method : {InnerSolver::Newton, InnerSolver::Picard}) {
        if (method == InnerSolver::Picard && dt / lam > 0.02) continue;  // linear convergence, slow
        ImplicitTvStepper s(g, lam, dt, 1e-10, 500, method);
        const ScalarField w = tvflow::testing::random_field(g, rng, 0.0, 1.0);
        const ScalarField out = s.step(w);
        EXPECT_LE(s.last_residual(), 1e-10);
        EXPECT_LE(step_residual(out, w, dt, lam), 1e-9) << "lambda " << lam << " dt " << dt;
        EXPECT_GE(out.min_value(), 0.0);
        EXPECT_LE(l2_norm(out), l2_norm(w));
      }
    }
  }
}

TEST(Stepper, NewtonAndPicardAgree) {
  const auto g = Grid::build(1.0, 32);
  const ScalarField w = bump(g);
  ImplicitTvStepper a(g, 0.2, 1e-3, 1e-10, 500, InnerSolver::Newton);
  ImplicitTvStepper b(g, 0.2, 1e-3, 1e-10, 500, InnerSolver::Picard);
  const ScalarField ua = a.step(w);
  const ScalarField ub = b.step(w);
  EXPECT_LE(l2_norm(ua - ub), 1e-8 * l2_norm(w));
  EXPECT_LT(a.last_iterations(), b.last_iterations());
}

TEST(Stepper, SignedRoughDataProperty) {
  // Random signed data at several amplitudes: the step must converge and
  // satisfy the maximum principle.
  std::mt19937_64 rng(42);
  const auto g = Grid::build(1.0, 32);
  ImplicitTvStepper s(g, 0.05, 1e-3);
  for (int t = 0; t < 20; ++t) {
    const double amp = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 1.0)(rng));
    const ScalarField w = amp * tvflow::testing::random_field(g, rng);
    const ScalarField out = s.step(w);
    EXPECT_LE(step_residual(out, w, 1e-3, 0.05), 1e-9);
    EXPECT_LE(out.max_value(), std::max(0.0, w.max_value()) * (1 + 1e-12));
    EXPECT_GE(out.min_value(), std::min(0.0, w.min_value()) * (1 + 1e-12));
  }
}

TEST(Stepper, ReportsNonConvergence) {
  std::mt19937_64 rng(43);
  const auto g = Grid::build(1.0, 32);
  ImplicitTvStepper s(g, 0.05, 1e-2, 1e-10, 1, InnerSolver::Picard);
  const ScalarField w = tvflow::testing::random_field(g, rng);
  try {
    s.step(w);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_FALSE(e.residuals().empty());
    EXPECT_GT(e.final_residual(), 1e-10);
  }
}

TEST(Stepper, StepDoublingIsSecondOrderLocally) {
  const auto g = Grid::build(1.0, 32);
  // Smooth, vanishing at the rim, and in the quadratic regime of the envelope.
  const ScalarField w = ScalarField::from_function(g, [](Vec2 p) { return 0.05 * std::pow(std::max(0.0, 1.0 - dot(p, p)), 3); });
  double diff[2];
  int k = 0;
  for (double dt : {2e-3, 1e-3}) {
    ImplicitTvStepper one(g, 0.5, dt);
    ImplicitTvStepper half(g, 0.5, dt / 2);
    diff[k++] = l2_norm(one.step(w) - half.step(half.step(w)));
  }
  EXPECT_GT(diff[0] / diff[1], 3.0);
}

TEST(SolveRescaled, ZeroDatum) {
  const auto g = Grid::build(1.0, 16);
  const SolverConfig c = config(g, 0.02);
  const Trajectory tr = solve_rescaled(ScalarField(g), BrownianPath::sample(1, 2, 0.02, 1e-3), c);
  ASSERT_EQ(tr.diagnostics.size(), 21u);
  for (const auto& s : tr.states) EXPECT_EQ(s.max_abs(), 0.0);
  for (const auto& d : tr.diagnostics) EXPECT_EQ(d.l2_norm, 0.0);
}

TEST(SolveRescaled, DeterministicConeExtinguishes) {
  const auto g = Grid::build(1.0, 32);
  double tau[2];
  int k = 0;
  for (double dt : {2e-3, 1e-3}) {
    SolverConfig c = config(g, 0.4, dt, 0.01);
    const Trajectory tr = solve_rescaled(cone(g), BrownianPath::zero(2, c.horizon, dt), c);
    tau[k] = -1.0;
    for (std::size_t s = 1; s < tr.diagnostics.size(); ++s) {
      EXPECT_LE(tr.diagnostics[s].l2_norm, tr.diagnostics[s - 1].l2_norm);
      if (tr.diagnostics[s - 1].l2_norm > 1e-12) EXPECT_LT(tr.diagnostics[s].l2_norm, tr.diagnostics[s - 1].l2_norm);
      if (tau[k] < 0 && tr.diagnostics[s].l2_norm < 1e-6) tau[k] = tr.diagnostics[s].time;
    }
    EXPECT_GT(tau[k], 0.0) << "dt " << dt;
    ++k;
  }
  EXPECT_NEAR(tau[0], tau[1], 0.1 * tau[1]);
}

TEST(SolveRescaled, H1SurrogateBound) {
  const auto g = Grid::build(1.0, 64);
  SolverConfig c = config(g, 0.05);
  const ScalarField x = bump(g);
  const Trajectory tr = solve_rescaled(x, BrownianPath::sample(3, 2, c.horizon, c.dt), c);
  const double g0 = l2_norm(gradient(x));
  for (const auto& s : tr.states) EXPECT_LE(l2_norm(gradient(s)), g0 * (1.0 + g->h()));
}

TEST(SolveRescaled, InterpolateFrameStaysNonExpansive) {
  const auto g = Grid::build(1.0, 32);
  SolverConfig c = config(g, 0.05);
  c.frame = FrameMode::Interpolate;
  const Trajectory tr = solve(bump(g), BrownianPath::sample(4, 2, c.horizon, c.dt), c);
  for (std::size_t s = 1; s < tr.diagnostics.size(); ++s) {
    EXPECT_LE(tr.diagnostics[s].l2_norm, tr.diagnostics[s - 1].l2_norm * (1 + 1e-9));
  }
  EXPECT_GE(tr.min_value(), 0.0);
}

TEST(TransformToX, ZeroPathIsIdentityAndNormsArePreserved) {
  const auto g = Grid::build(1.0, 64);
  SolverConfig c = config(g, 0.05);
  const ScalarField x = bump(g);
  const auto zero = BrownianPath::zero(2, c.horizon, c.dt);
  const Trajectory y0 = solve_rescaled(x, zero, c);
  const Trajectory x0 = transform_to_x(y0, zero);
  for (std::size_t s = 0; s < y0.states.size(); ++s) EXPECT_EQ(tvflow::testing::max_abs_diff(x0.states[s], y0.states[s]), 0.0);

  const auto path = BrownianPath::sample(8, 2, c.horizon, c.dt);
  const Trajectory y = solve_rescaled(x, path, c);
  const Trajectory xt = transform_to_x(y, path);
  EXPECT_EQ(xt.variable, Variable::Physical);
  for (std::size_t s = 0; s < y.states.size(); ++s) {
    EXPECT_NEAR(l2_norm(xt.states[s]), l2_norm(y.states[s]), 2.0 * g->h() * l2_norm(x));
  }
  const auto other = BrownianPath::sample(8, 2, 2 * c.horizon, c.dt);
  EXPECT_THROW(transform_to_x(y, other), GridMismatch);
}

TEST(SolveIto, ZeroDatumAndZeroPath) {
  const auto g = Grid::build(1.0, 32);
  SolverConfig c = config(g, 0.03);
  const Trajectory z = solve_ito(ScalarField(g), BrownianPath::sample(2, 2, c.horizon, c.dt), c);
  for (const auto& s : z.states) EXPECT_EQ(s.max_abs(), 0.0);

  const auto zero = BrownianPath::zero(2, c.horizon, c.dt);
  const Trajectory a = solve_ito(bump(g), zero, c);
  const Trajectory b = solve_rescaled(bump(g), zero, c);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t s = 0; s < a.states.size(); ++s) EXPECT_EQ(tvflow::testing::max_abs_diff(a.states[s], b.states[s]), 0.0);
}

TEST(SolveIto, EnergyResidualShrinksUnderRefinement) {
  const auto g = Grid::build(1.0, 32);
  const ScalarField x = bump(g);
  const auto coarse = BrownianPath::sample(5, 2, 0.05, 2e-3);
  const double r1 = solve_ito(x, coarse, config(g, 0.05, 2e-3)).max_abs_energy_residual();
  const double r2 = solve_ito(x, coarse.refine(2), config(g, 0.05, 1e-3)).max_abs_energy_residual();
  EXPECT_LT(r2, r1);
}

TEST(Solve, EnergyIdentityWithinTolerance) {
  const auto g = Grid::build(1.0, 32);
  SolverConfig c = config(g, 0.05);
  const ScalarField x = bump(g);
  const Trajectory tr = solve(x, BrownianPath::sample(6, 2, c.horizon, c.dt), c);
  const double x2 = std::pow(l2_norm(x), 2);
  EXPECT_LE(tr.max_abs_energy_residual(), 0.01 * x2);
  // The diagnostics are mutually consistent.
  for (const auto& d : tr.diagnostics) {
    EXPECT_NEAR(d.energy_residual, 0.5 * d.l2_norm * d.l2_norm - 0.5 * x2 + d.dissipation, 1e-12 * x2);
  }
}

TEST(Solve, StateStrideKeepsFinalState) {
  const auto g = Grid::build(1.0, 16);
  SolverConfig c = config(g, 0.01);
  c.state_stride = 3;
  const Trajectory tr = solve(bump(g), BrownianPath::sample(6, 2, c.horizon, c.dt), c);
  EXPECT_EQ(tr.state_steps, (std::vector<int>{0, 3, 6, 9, 10}));
  EXPECT_EQ(tr.diagnostics.size(), 11u);
}

TEST(Solve, RejectsMismatchedPath) {
  const auto g = Grid::build(1.0, 16);
  SolverConfig c = config(g, 0.01);
  EXPECT_THROW(solve(bump(g), BrownianPath::sample(6, 2, 0.02, c.dt), c), GridMismatch);
  EXPECT_THROW(solve(bump(g), BrownianPath::sample(6, 1, 0.01, c.dt), c), std::invalid_argument);
}

TEST(LambdaSweep, GapsAreSymmetricAndShrink) {
  const auto g = Grid::build(1.0, 32);
  SolverConfig c = config(g, 0.05);
  const ScalarField x = ScalarField::from_function(g, [](Vec2 p) { return std::max(std::abs(p.x), std::abs(p.y)) < 0.4 ? 1.0 : 0.0; });
  const double lams[] = {0.2, 0.1, 0.05, 0.025};
  const auto path = BrownianPath::sample(7, 2, c.horizon, c.dt);
  const LambdaSweep sw = lambda_sweep(x, path, c, lams);
  EXPECT_EQ(sup_l2_gap(sw.trajectories.at(0.1), sw.trajectories.at(0.1)), 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(sw.gaps[i][i], 0.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(sw.gaps[i][j], sw.gaps[j][i]);
  }
  EXPECT_GT(sw.gaps[0][1], sw.gaps[1][2]);
  EXPECT_GT(sw.gaps[1][2], sw.gaps[2][3]);
  EXPECT_GT(fitted_gap_exponent(sw), 0.0);
  const double unsorted[] = {0.1, 0.2};
  EXPECT_THROW(lambda_sweep(x, path, c, unsorted), std::invalid_argument);
}

TEST(FittedExponent, RecoversPowerLaw) {
  LambdaSweep sw;
  sw.lambdas = {0.2, 0.1, 0.05, 0.025};
  sw.gaps.assign(4, std::vector<double>(4, 0.0));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) sw.gaps[i][j] = 3.0 * std::pow(sw.lambdas[i] + sw.lambdas[j], 0.5);
    }
  }
  EXPECT_NEAR(fitted_gap_exponent(sw), 1.0, 1e-12);
}

}  // namespace
