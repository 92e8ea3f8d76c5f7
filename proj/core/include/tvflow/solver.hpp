// SPDX-License-Identifier: Apache-2.0
//
// Pathwise time integration of the Yosida-regularised stochastic TV flow
//
//   dX = div psi~(grad X) dt + 1/2 sum B_i^2 X dt + sum B_i X dbeta_i,
//
// either directly (Ito scheme) or through the rescaled random PDE for
// Y = exp(-sum beta_i B_i) X followed by the inverse transformation.
#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tvflow/grid.hpp"
#include "tvflow/noise.hpp"
#include "tvflow/transport.hpp"

namespace tvflow {

enum class Scheme { Rescaled, Ito };

/// Nonlinear solver inside the implicit TV step. Both return the output of a
/// lagged-diffusivity M-matrix solve, so positivity is preserved either way.
///
/// Picard: plain lagged diffusivity; converges linearly and slowly once
/// dt / (lambda h^2) is large.
/// Newton: damped semismooth Newton on the strongly convex step energy locates
/// the fixed point, then one lagged-diffusivity solve finishes the step.
enum class InnerSolver { Newton, Picard };

/// How the rescaled scheme moves between the Y frame and the physical frame
/// inside a step.
///
/// Equivariant: the rotation groups commute with the isotropic TV operator on
/// the disc, so the frame change inside a step is the identity and is not
/// performed; the path only enters through transform_to_x.
/// Interpolate: rotate with group_apply_multi, solve, rotate back. Every step
/// pays two bilinear interpolations, which add numerical diffusion of order
/// h^2 / dt.
enum class FrameMode { Equivariant, Interpolate };

std::string to_string(Scheme s);
std::string to_string(FrameMode m);
std::string to_string(InnerSolver m);
Scheme scheme_from_string(const std::string& s);
FrameMode frame_mode_from_string(const std::string& s);
InnerSolver inner_solver_from_string(const std::string& s);

struct SolverConfig {
  double lambda = 0.1;
  double dt = 1e-3;
  double horizon = 1.0;
  GridPtr grid;
  TransportSystem transport;
  Scheme scheme = Scheme::Rescaled;
  FrameMode frame = FrameMode::Equivariant;
  /// Relative residual of the implicit nonlinear equation.
  double inner_tol = 1e-10;
  int inner_max = 200;
  InnerSolver inner_solver = InnerSolver::Newton;
  /// Keep every state_stride-th state (the final state is always kept).
  int state_stride = 1;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  int steps() const;
};

/// Implicit step w+ - dt div psi~(grad w+) = w. The final iterate solves
/// (I - dt div(k grad)) w+ = w with the mobility k = 1/max(|grad u|, lambda) + lambda
/// frozen at the previous iterate u; that matrix is a symmetric M-matrix and
/// every linear system is solved by sparse LDL^T.
class ImplicitTvStepper {
 public:
  ImplicitTvStepper(GridPtr grid, double lambda, double dt, double tol = 1e-10, int max_iter = 200,
                    InnerSolver method = InnerSolver::Newton);
  ~ImplicitTvStepper();
  ImplicitTvStepper(ImplicitTvStepper&&) noexcept;
  ImplicitTvStepper& operator=(ImplicitTvStepper&&) noexcept;

  /// Throws ConvergenceError with the residual history on non-convergence.
  ScalarField step(const ScalarField& w);

  int last_iterations() const noexcept;
  double last_residual() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct StepDiagnostics {
  double time = 0.0;
  double l2_norm = 0.0;
  double phi_lambda = 0.0;
  /// <psi~(grad X), grad X> at this time.
  double dissipation_rate = 0.0;
  /// Right-endpoint quadrature of the dissipation rate over [0, t].
  double dissipation = 0.0;
  double min_value = 0.0;
  /// 1/2 |X(t)|^2 - 1/2 |x|^2 + int_0^t <psi~(grad X), grad X> ds
  double energy_residual = 0.0;
  int inner_iterations = 0;
};

enum class Variable { Rescaled, Physical };

struct Trajectory {
  SolverConfig config;
  Variable variable = Variable::Rescaled;
  /// Diagnostics at every step k = 0..K.
  std::vector<StepDiagnostics> diagnostics;
  /// Step indices of the stored states.
  std::vector<int> state_steps;
  std::vector<ScalarField> states;
  /// Set when the Ito scheme exceeded its explicit-transport stability heuristic.
  int cfl_warnings = 0;

  double initial_norm() const { return diagnostics.empty() ? 0.0 : diagnostics.front().l2_norm; }
  const ScalarField& final_state() const { return states.back(); }
  double max_abs_energy_residual() const;
  double min_value() const;
};

/// One step of the rescaled equation at time t_k = k dt (beta frozen at t_k).
ScalarField step_rescaled(const ScalarField& y, int k, const BrownianPath& path, const SolverConfig& cfg,
                          ImplicitTvStepper& stepper);

/// Iterates step_rescaled from Y(0) = x0.
Trajectory solve_rescaled(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg);

/// X(t_k) = exp(sum beta_i(t_k) B_i) Y(t_k) with diagnostics recomputed on X.
/// Throws GridMismatch when the path and trajectory time grids differ.
Trajectory transform_to_x(const Trajectory& traj_y, const BrownianPath& path);

/// Implicit TV, explicit 1/2 sum B_i^2 X dt and sum B_i X dbeta_i.
Trajectory solve_ito(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg);

/// Physical-frame trajectory for the configured scheme.
Trajectory solve(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg);

/// sup over commonly stored times of |X_a(t) - X_b(t)|.
double sup_l2_gap(const Trajectory& a, const Trajectory& b);

struct LambdaSweep {
  std::vector<double> lambdas;
  std::map<double, Trajectory> trajectories;
  /// gaps[i][j] = sup_l2_gap for lambdas[i], lambdas[j].
  std::vector<std::vector<double>> gaps;
};

/// Runs solve for every lambda on the same path and grid.
LambdaSweep lambda_sweep(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg,
                         std::span<const double> lambdas);

/// Least-squares slope of log(gap^2) against log(lambda + eps) over all pairs.
double fitted_gap_exponent(const LambdaSweep& sweep);

}  // namespace tvflow
