// SPDX-License-Identifier: Apache-2.0
#include "tvflow/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tvflow/error.hpp"
#include "tvflow/regularization.hpp"

namespace tvflow {

std::string to_string(Scheme s) { return s == Scheme::Rescaled ? "rescaled" : "ito"; }
std::string to_string(FrameMode m) { return m == FrameMode::Equivariant ? "equivariant" : "interpolate"; }

std::string to_string(InnerSolver m) { return m == InnerSolver::Newton ? "newton" : "picard"; }

InnerSolver inner_solver_from_string(const std::string& s) {
  if (s == "newton") return InnerSolver::Newton;
  if (s == "picard") return InnerSolver::Picard;
  throw std::invalid_argument("unknown inner solver '" + s + "' (expected newton or picard)");
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "rescaled") return Scheme::Rescaled;
  if (s == "ito") return Scheme::Ito;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected rescaled or ito)");
}

FrameMode frame_mode_from_string(const std::string& s) {
  if (s == "equivariant") return FrameMode::Equivariant;
  if (s == "interpolate") return FrameMode::Interpolate;
  throw std::invalid_argument("unknown frame mode '" + s + "' (expected equivariant or interpolate)");
}

void SolverConfig::validate() const {
  YosidaParams{lambda};
  if (!grid) throw std::invalid_argument("solver config has no grid");
  if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon) throw std::invalid_argument("need 0 < dt <= T");
  checked_step_count(horizon, dt);
  if (!(inner_tol > 0.0) || inner_tol > 1e-8) throw std::invalid_argument("inner_tol must lie in (0, 1e-8]");
  if (inner_max < 1) throw std::invalid_argument("inner_max must be positive");
  if (state_stride < 1) throw std::invalid_argument("state_stride must be positive");
  if (!transport.pairwise_commuting()) throw std::invalid_argument("transport fields do not commute");
}

int SolverConfig::steps() const { return checked_step_count(horizon, dt); }

// ---------------------------------------------------------------------------

struct ImplicitTvStepper::Impl {
  using SpMat = Eigen::SparseMatrix<double>;

  // Forward-difference stencil of the gradient cell `cell`: nodes cell, cell+1, cell+s.
  struct Stencil {
    std::size_t cell;
    std::array<int, 3> node;         // unknown numbers, -1 outside the mask
    std::array<double*, 9> picard;   // 3x3 local block in the lagged-diffusivity matrix
    std::array<double*, 9> newton;   // same in the Newton matrix
  };

  GridPtr grid;
  double lambda;
  double dt;
  double tol;
  int max_iter;
  InnerSolver method;
  SpMat a_picard;
  SpMat a_newton;
  std::vector<double*> diag_picard;
  std::vector<double*> diag_newton;
  std::vector<Stencil> stencils;
  Eigen::SimplicialLDLT<SpMat> ldlt_picard;
  Eigen::SimplicialLDLT<SpMat> ldlt_newton;
  Eigen::VectorXd rhs;
  Eigen::VectorXd sol;
  int iterations = 0;
  double residual = 0.0;

  Impl(GridPtr g, double lam, double step, double t, int m, InnerSolver how)
      : grid(std::move(g)), lambda(lam), dt(step), tol(t), max_iter(m), method(how) {
    const Grid& gr = *grid;
    const int unknowns = static_cast<int>(gr.mask_count());
    const int n = gr.n();
    const std::size_t s = static_cast<std::size_t>(gr.stride());
    std::vector<Eigen::Triplet<double>> tp;
    std::vector<Eigen::Triplet<double>> tn;
    for (int k = 0; k < unknowns; ++k) {
      tp.emplace_back(k, k, 0.0);
      tn.emplace_back(k, k, 0.0);
    }
    for (int j = -1; j < n; ++j) {
      for (int i = -1; i < n; ++i) {
        const std::size_t c = gr.index(i, j);
        Stencil st{c, {gr.unknown(c), gr.unknown(c + 1), gr.unknown(c + s)}, {}, {}};
        if (st.node[0] < 0 && st.node[1] < 0 && st.node[2] < 0) continue;
        for (int r = 0; r < 3; ++r) {
          for (int q = 0; q < 3; ++q) {
            if (st.node[r] < 0 || st.node[q] < 0 || r == q) continue;
            tn.emplace_back(st.node[r], st.node[q], 0.0);
            // The x and y edges never couple node 1 with node 2.
            if (r == 0 || q == 0) tp.emplace_back(st.node[r], st.node[q], 0.0);
          }
        }
        stencils.push_back(st);
      }
    }
    a_picard.resize(unknowns, unknowns);
    a_picard.setFromTriplets(tp.begin(), tp.end());
    a_picard.makeCompressed();
    a_newton.resize(unknowns, unknowns);
    a_newton.setFromTriplets(tn.begin(), tn.end());
    a_newton.makeCompressed();
    for (int k = 0; k < unknowns; ++k) {
      diag_picard.push_back(&a_picard.coeffRef(k, k));
      diag_newton.push_back(&a_newton.coeffRef(k, k));
    }
    for (Stencil& st : stencils) {
      for (int r = 0; r < 3; ++r) {
        for (int q = 0; q < 3; ++q) {
          const int slot = 3 * r + q;
          st.picard[slot] = nullptr;
          st.newton[slot] = nullptr;
          if (st.node[r] < 0 || st.node[q] < 0) continue;
          st.newton[slot] = &a_newton.coeffRef(st.node[r], st.node[q]);
          if (r == q || r == 0 || q == 0) st.picard[slot] = &a_picard.coeffRef(st.node[r], st.node[q]);
        }
      }
    }
    ldlt_picard.analyzePattern(a_picard);
    ldlt_newton.analyzePattern(a_newton);
    rhs.resize(unknowns);
    sol.resize(unknowns);
  }

  // Adds dt * (dxx ax ax^T + dxy (ax ay^T + ay ax^T) + dyy ay ay^T) with
  // ax = (-1, 1, 0) / h, ay = (-1, 0, 1) / h.
  static void add_block(const std::array<double*, 9>& slots, double dxx, double dxy, double dyy) {
    const double m[9] = {dxx + 2.0 * dxy + dyy, -dxx - dxy, -dxy - dyy,
                         -dxx - dxy,            dxx,        dxy,
                         -dxy - dyy,            dxy,        dyy};
    for (int k = 0; k < 9; ++k) {
      if (slots[static_cast<std::size_t>(k)]) *slots[static_cast<std::size_t>(k)] += m[k];
    }
  }

  void assemble_picard(const VectorField2& g) {
    std::fill(a_picard.valuePtr(), a_picard.valuePtr() + a_picard.nonZeros(), 0.0);
    for (double* d : diag_picard) *d = 1.0;
    const double scale = dt / (grid->h() * grid->h());
    const auto gx = g.x();
    const auto gy = g.y();
    for (const Stencil& st : stencils) {
      const double k = scale * psi_tilde_mobility(std::hypot(gx[st.cell], gy[st.cell]), lambda);
      add_block(st.picard, k, 0.0, k);
    }
  }

  void assemble_newton(const VectorField2& g) {
    std::fill(a_newton.valuePtr(), a_newton.valuePtr() + a_newton.nonZeros(), 0.0);
    for (double* d : diag_newton) *d = 1.0;
    const double scale = dt / (grid->h() * grid->h());
    const auto gx = g.x();
    const auto gy = g.y();
    for (const Stencil& st : stencils) {
      const double vx = gx[st.cell];
      const double vy = gy[st.cell];
      const double r = std::hypot(vx, vy);
      if (r <= lambda) {
        const double k = scale * (1.0 / lambda + lambda);
        add_block(st.newton, k, 0.0, k);
      } else {
        // (I - v v^T / |v|^2) / |v| + lambda I
        const double ux = vx / r;
        const double uy = vy / r;
        add_block(st.newton, scale * ((1.0 - ux * ux) / r + lambda), scale * (-ux * uy / r),
                  scale * ((1.0 - uy * uy) / r + lambda));
      }
    }
  }

  // 1/2 |u - w|^2 + dt sum h^2 (j_lambda(grad u) + lambda/2 |grad u|^2), minimised by the step.
  double energy(const ScalarField& u, const ScalarField& w) const {
    const VectorField2 g = gradient(u);
    const auto gx = g.x();
    const auto gy = g.y();
    double sum = 0.0;
    for (const Stencil& st : stencils) {
      const Vec2 v{gx[st.cell], gy[st.cell]};
      sum += moreau_j(v, lambda) + 0.5 * lambda * dot(v, v);
    }
    const double h2 = grid->h() * grid->h();
    const double d = l2_norm(u - w);
    return 0.5 * d * d + dt * h2 * sum;
  }

  ScalarField nonlinear_residual(const ScalarField& u, const ScalarField& w) const {
    ScalarField r = u - w;
    r.axpy(-dt, div_psi_tilde(u, lambda));
    return r;
  }

  void to_vector(const ScalarField& u, Eigen::VectorXd& v) const {
    const auto cells = grid->mask_cells();
    for (std::size_t k = 0; k < cells.size(); ++k) v[static_cast<Eigen::Index>(k)] = u[cells[k]];
  }

  void from_vector(const Eigen::VectorXd& v, ScalarField& u) const {
    const auto cells = grid->mask_cells();
    for (std::size_t k = 0; k < cells.size(); ++k) u[cells[k]] = v[static_cast<Eigen::Index>(k)];
  }

  // One lagged-diffusivity solve with the mobility frozen at `frozen`.
  ScalarField picard(const ScalarField& frozen, const ScalarField& w, std::vector<double>& history) {
    assemble_picard(gradient(frozen));
    ldlt_picard.factorize(a_picard);
    if (ldlt_picard.info() != Eigen::Success) throw ConvergenceError("implicit TV step: factorization failed", history);
    to_vector(w, rhs);
    sol = ldlt_picard.solve(rhs);
    ScalarField out(grid);
    from_vector(sol, out);
    return out;
  }

  // Damped semismooth Newton on the step energy, Armijo backtracking.
  ScalarField newton(ScalarField u, const ScalarField& w, double target, int budget, std::vector<double>& history) {
    const double wn = l2_norm(w);
    double e = energy(u, w);
    for (int it = 0; it < budget; ++it) {
      const ScalarField f = nonlinear_residual(u, w);
      const double fn = l2_norm(f);
      if (fn / wn <= target) break;
      assemble_newton(gradient(u));
      ldlt_newton.factorize(a_newton);
      if (ldlt_newton.info() != Eigen::Success) throw ConvergenceError("implicit TV step: factorization failed", history);
      to_vector(f, rhs);
      sol = -ldlt_newton.solve(rhs);
      ScalarField dir(grid);
      from_vector(sol, dir);
      const double slope = inner(f, dir);
      double step = 1.0;
      bool accepted = false;
      ScalarField trial = u;
      for (int ls = 0; ls < 40 && !accepted; ++ls) {
        trial = u;
        trial.axpy(step, dir);
        const double et = energy(trial, w);
        // Near the solution energy differences drop below rounding; a residual
        // decrease is then the usable acceptance test.
        const bool flat = std::abs(et - e) <= 64.0 * std::numeric_limits<double>::epsilon() * e;
        if (et <= e + 1e-4 * step * slope ||
            (flat && l2_norm(nonlinear_residual(trial, w)) <= (1.0 - 1e-4 * step) * fn)) {
          e = et;
          accepted = true;
        }
        step *= 0.5;
      }
      // Energy no longer resolvable in floating point; hand over to the fixed-point solve.
      if (!accepted) break;
      u = std::move(trial);
      ++iterations;
      history.push_back(l2_norm(nonlinear_residual(u, w)) / wn);
    }
    return u;
  }

  ScalarField step(const ScalarField& w) {
    require_same_grid(w.grid(), *grid);
    iterations = 0;
    residual = 0.0;
    const double wn = l2_norm(w);
    if (wn == 0.0) return w;
    std::vector<double> history;
    ScalarField cur = w;
    while (iterations < max_iter) {
      if (method == InnerSolver::Newton) {
        cur = newton(std::move(cur), w, 0.01 * tol, max_iter - iterations - 1, history);
      }
      // The returned iterate always comes out of an M-matrix solve.
      cur = picard(cur, w, history);
      ++iterations;
      residual = l2_norm(nonlinear_residual(cur, w)) / wn;
      history.push_back(residual);
      if (residual <= tol) return cur;
    }
    std::ostringstream msg;
    msg << "implicit TV step did not converge in " << max_iter << " iterations (residual " << residual << ")";
    throw ConvergenceError(msg.str(), std::move(history));
  }
};

ImplicitTvStepper::ImplicitTvStepper(GridPtr grid, double lambda, double dt, double tol, int max_iter,
                                     InnerSolver method)
    : impl_(std::make_unique<Impl>(std::move(grid), lambda, dt, tol, max_iter, method)) {}
ImplicitTvStepper::~ImplicitTvStepper() = default;
ImplicitTvStepper::ImplicitTvStepper(ImplicitTvStepper&&) noexcept = default;
ImplicitTvStepper& ImplicitTvStepper::operator=(ImplicitTvStepper&&) noexcept = default;

ScalarField ImplicitTvStepper::step(const ScalarField& w) { return impl_->step(w); }
int ImplicitTvStepper::last_iterations() const noexcept { return impl_->iterations; }
double ImplicitTvStepper::last_residual() const noexcept { return impl_->residual; }

// ---------------------------------------------------------------------------

namespace {

StepDiagnostics measure(const ScalarField& u, double lambda, double t) {
  StepDiagnostics d;
  d.time = t;
  d.l2_norm = l2_norm(u);
  d.phi_lambda = phi_lambda(u, lambda);
  d.dissipation_rate = dissipation(u, lambda);
  d.min_value = u.min_value();
  return d;
}

void close_energy(StepDiagnostics& d, const StepDiagnostics& prev, double x_norm, double applied_rate) {
  d.dissipation = prev.dissipation + (d.time - prev.time) * applied_rate;
  d.energy_residual = 0.5 * d.l2_norm * d.l2_norm - 0.5 * x_norm * x_norm + d.dissipation;
}

void check_inputs(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(x0.grid(), *cfg.grid);
  if (static_cast<std::size_t>(path.dims()) != cfg.transport.size()) {
    throw std::invalid_argument("path has " + std::to_string(path.dims()) + " components, transport has " +
                                std::to_string(cfg.transport.size()));
  }
  const int k = cfg.steps();
  if (path.steps() != k || std::abs(path.dt() - cfg.dt) > 1e-12 * cfg.dt) {
    throw GridMismatch("Brownian path time grid does not match the solver time grid");
  }
}

bool keep_state(int k, int steps, int stride) { return k % stride == 0 || k == steps; }

}  // namespace

double Trajectory::max_abs_energy_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics) m = std::max(m, std::abs(d.energy_residual));
  return m;
}

double Trajectory::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& d : diagnostics) m = std::min(m, d.min_value);
  return m;
}

ScalarField step_rescaled(const ScalarField& y, int k, const BrownianPath& path, const SolverConfig& cfg,
                          ImplicitTvStepper& stepper) {
  if (cfg.frame == FrameMode::Equivariant || path.is_zero()) return stepper.step(y);
  const auto beta = path.at(k);
  std::vector<double> minus(beta.begin(), beta.end());
  for (double& v : minus) v = -v;
  const ScalarField w = group_apply_multi(y, cfg.transport, beta);
  return group_apply_multi(stepper.step(w), cfg.transport, minus);
}

namespace {

// Runs the rescaled scheme and calls visit(k, Y(t_k), inner_iterations, rate) for
// k = 1..K. In interpolate mode rate is the dissipation of the implicit step in
// the rotated frame; otherwise it is -1 and equals the dissipation of Y(t_k).
template <class Visit>
void run_rescaled(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg, Visit&& visit) {
  const int steps = cfg.steps();
  ImplicitTvStepper stepper(cfg.grid, cfg.lambda, cfg.dt, cfg.inner_tol, cfg.inner_max, cfg.inner_solver);
  const bool rotate = cfg.frame == FrameMode::Interpolate && !path.is_zero();
  ScalarField y = x0;
  for (int k = 0; k < steps; ++k) {
    double rate;
    if (rotate) {
      const auto beta = path.at(k);
      std::vector<double> minus(beta.begin(), beta.end());
      for (double& v : minus) v = -v;
      const ScalarField w = stepper.step(group_apply_multi(y, cfg.transport, beta));
      rate = dissipation(w, cfg.lambda);
      y = group_apply_multi(w, cfg.transport, minus);
    } else {
      y = stepper.step(y);
      rate = -1.0;
    }
    visit(k + 1, y, stepper.last_iterations(), rate);
  }
}

Trajectory start_trajectory(const ScalarField& x0, const SolverConfig& cfg, Variable v) {
  Trajectory tr;
  tr.config = cfg;
  tr.variable = v;
  tr.diagnostics.reserve(static_cast<std::size_t>(cfg.steps()) + 1);
  tr.diagnostics.push_back(measure(x0, cfg.lambda, 0.0));
  tr.state_steps.push_back(0);
  tr.states.push_back(x0);
  return tr;
}

}  // namespace

Trajectory solve_rescaled(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg) {
  check_inputs(x0, path, cfg);
  const int steps = cfg.steps();
  Trajectory tr = start_trajectory(x0, cfg, Variable::Rescaled);
  const double xn = tr.diagnostics.front().l2_norm;
  run_rescaled(x0, path, cfg, [&](int k, const ScalarField& y, int iters, double rate) {
    StepDiagnostics d = measure(y, cfg.lambda, path.time(k));
    d.inner_iterations = iters;
    close_energy(d, tr.diagnostics.back(), xn, rate < 0.0 ? d.dissipation_rate : rate);
    tr.diagnostics.push_back(d);
    if (keep_state(k, steps, cfg.state_stride)) {
      tr.state_steps.push_back(k);
      tr.states.push_back(y);
    }
  });
  return tr;
}

Trajectory transform_to_x(const Trajectory& traj_y, const BrownianPath& path) {
  if (traj_y.variable != Variable::Rescaled) throw std::invalid_argument("transform_to_x expects a rescaled trajectory");
  const SolverConfig& cfg = traj_y.config;
  if (path.steps() != cfg.steps() || std::abs(path.dt() - cfg.dt) > 1e-12 * cfg.dt ||
      static_cast<std::size_t>(path.dims()) != cfg.transport.size()) {
    throw GridMismatch("Brownian path does not match the trajectory time grid");
  }
  Trajectory tr;
  tr.config = cfg;
  tr.variable = Variable::Physical;
  tr.state_steps = traj_y.state_steps;
  tr.states.reserve(traj_y.states.size());
  double xn = 0.0;
  for (std::size_t s = 0; s < traj_y.states.size(); ++s) {
    const int k = traj_y.state_steps[s];
    ScalarField x = path.is_zero() ? traj_y.states[s] : group_apply_multi(traj_y.states[s], cfg.transport, path.at(k));
    StepDiagnostics d = measure(x, cfg.lambda, path.time(k));
    d.inner_iterations = traj_y.diagnostics[static_cast<std::size_t>(k)].inner_iterations;
    if (s == 0) {
      xn = d.l2_norm;
      d.energy_residual = 0.0;
    } else {
      close_energy(d, tr.diagnostics.back(), xn, d.dissipation_rate);
    }
    tr.diagnostics.push_back(d);
    tr.states.push_back(std::move(x));
  }
  return tr;
}

Trajectory solve_ito(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg) {
  check_inputs(x0, path, cfg);
  const int steps = cfg.steps();
  const Grid& g = *cfg.grid;
  ImplicitTvStepper stepper(cfg.grid, cfg.lambda, cfg.dt, cfg.inner_tol, cfg.inner_max, cfg.inner_solver);
  Trajectory tr = start_trajectory(x0, cfg, Variable::Physical);
  const double xn = tr.diagnostics.front().l2_norm;
  double omega_max = 0.0;
  for (const auto& f : cfg.transport.fields()) omega_max = std::max(omega_max, std::abs(f.omega()));
  const double cells_per_radian = g.radius() / g.h();
  const bool diffusive_unstable = cfg.dt * std::pow(omega_max * cells_per_radian, 2) > 1.0;
  ScalarField x = x0;
  for (int k = 0; k < steps; ++k) {
    ScalarField xt = x;
    double displacement = 0.0;
    if (!path.is_zero()) {
      for (std::size_t i = 0; i < cfg.transport.size(); ++i) {
        const auto& spec = cfg.transport[i];
        const double db = path.value(static_cast<int>(i), k + 1) - path.value(static_cast<int>(i), k);
        const ScalarField bx = b_operator(x, spec);
        xt.axpy(db, bx);
        xt.axpy(0.5 * cfg.dt, b_operator(bx, spec));
        displacement += std::abs(spec.omega() * db);
      }
    }
    if (displacement * cells_per_radian > 1.0 || (diffusive_unstable && !path.is_zero())) ++tr.cfl_warnings;
    x = stepper.step(xt);
    StepDiagnostics d = measure(x, cfg.lambda, path.time(k + 1));
    d.inner_iterations = stepper.last_iterations();
    close_energy(d, tr.diagnostics.back(), xn, d.dissipation_rate);
    tr.diagnostics.push_back(d);
    if (keep_state(k + 1, steps, cfg.state_stride)) {
      tr.state_steps.push_back(k + 1);
      tr.states.push_back(x);
    }
  }
  return tr;
}

Trajectory solve(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg) {
  if (cfg.scheme == Scheme::Ito) return solve_ito(x0, path, cfg);
  // transform_to_x applied step by step, so only the strided X states are kept.
  check_inputs(x0, path, cfg);
  const int steps = cfg.steps();
  Trajectory tr = start_trajectory(x0, cfg, Variable::Physical);
  const double xn = tr.diagnostics.front().l2_norm;
  run_rescaled(x0, path, cfg, [&](int k, const ScalarField& y, int iters, double) {
    ScalarField x = path.is_zero() ? y : group_apply_multi(y, cfg.transport, path.at(k));
    StepDiagnostics d = measure(x, cfg.lambda, path.time(k));
    d.inner_iterations = iters;
    close_energy(d, tr.diagnostics.back(), xn, d.dissipation_rate);
    tr.diagnostics.push_back(d);
    if (keep_state(k, steps, cfg.state_stride)) {
      tr.state_steps.push_back(k);
      tr.states.push_back(std::move(x));
    }
  });
  return tr;
}

double sup_l2_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.state_steps.size(); ++i) {
    const double t = a.diagnostics.empty() ? 0.0 : a.config.dt * a.state_steps[i];
    while (j < b.state_steps.size() && b.config.dt * b.state_steps[j] < t - 1e-12) ++j;
    if (j == b.state_steps.size()) break;
    if (std::abs(b.config.dt * b.state_steps[j] - t) > 1e-12) continue;
    gap = std::max(gap, l2_norm(a.states[i] - b.states[j]));
  }
  return gap;
}

LambdaSweep lambda_sweep(const ScalarField& x0, const BrownianPath& path, const SolverConfig& cfg,
                         std::span<const double> lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda list");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("lambda list must be strictly decreasing");
  }
  LambdaSweep sw;
  sw.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double lam : lambdas) {
    SolverConfig c = cfg;
    c.lambda = lam;
    sw.trajectories.emplace(lam, solve(x0, path, c));
  }
  const std::size_t m = lambdas.size();
  sw.gaps.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double g = sup_l2_gap(sw.trajectories.at(lambdas[i]), sw.trajectories.at(lambdas[j]));
      sw.gaps[i][j] = sw.gaps[j][i] = g;
    }
  }
  return sw;
}

double fitted_gap_exponent(const LambdaSweep& sweep) {
  std::vector<double> xs;
  std::vector<double> ys;
  const std::size_t m = sweep.lambdas.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double g = sweep.gaps[i][j];
      if (g <= 0.0) continue;
      xs.push_back(std::log(sweep.lambdas[i] + sweep.lambdas[j]));
      ys.push_back(std::log(g * g));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("need at least two positive gaps to fit an exponent");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("degenerate lambda list");
  return (n * sxy - sx * sy) / den;
}

}  // namespace tvflow
