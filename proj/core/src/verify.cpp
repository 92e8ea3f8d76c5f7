// SPDX-License-Identifier: Apache-2.0
#include "tvflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tvflow/error.hpp"
#include "tvflow/parallel.hpp"
#include "tvflow/regularization.hpp"

namespace tvflow {

namespace {

std::vector<double> negated(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  for (double& v : out) v = -v;
  return out;
}

ScalarField gaussian(const GridPtr& g, Vec2 c, double sigma, double amp) {
  return ScalarField::from_function(g, [=](Vec2 p) {
    const Vec2 d = p - c;
    return amp * std::exp(-dot(d, d) / (2.0 * sigma * sigma));
  });
}

void require_every_step(const Trajectory& tr) {
  const int k = tr.config.steps();
  if (tr.states.size() != static_cast<std::size_t>(k) + 1) {
    throw GridMismatch("trajectory must store the state at every step (state_stride = 1)");
  }
}

double phi_of(const ScalarField& u, PhiMode mode, double lambda) {
  if (mode == PhiMode::Tv) return tv_phi(u);
  const double g = l2_norm(gradient(u));
  return phi_lambda(u, lambda) + 0.5 * lambda * g * g;
}

}  // namespace

TestProcessPair build_test_process(std::vector<ScalarField> g, ScalarField z0, const BrownianPath& path,
                                   const TransportSystem& sys, std::string label) {
  if (g.size() != static_cast<std::size_t>(path.steps()) + 1) {
    throw GridMismatch("G must have one field per path time");
  }
  if (static_cast<std::size_t>(path.dims()) != sys.size()) throw std::invalid_argument("path/transport size mismatch");
  for (const auto& f : g) require_same_grid(f.grid(), z0.grid());
  std::vector<ScalarField> z;
  z.reserve(g.size());
  const double dt = path.dt();
  ScalarField integral(z0.grid_ptr());
  ScalarField prev = group_apply_multi(g[0], sys, negated(path.at(0)));
  z.push_back(group_apply_multi(z0, sys, path.at(0)));
  for (int k = 1; k <= path.steps(); ++k) {
    ScalarField cur = group_apply_multi(g[static_cast<std::size_t>(k)], sys, negated(path.at(k)));
    integral.axpy(0.5 * dt, prev).axpy(0.5 * dt, cur);
    z.push_back(group_apply_multi(z0 - integral, sys, path.at(k)));
    prev = std::move(cur);
  }
  return TestProcessPair{std::move(label), std::move(g), std::move(z0), std::move(z)};
}

std::vector<double> vi_slack(const Trajectory& traj_x, const TestProcessPair& pair, PhiMode mode) {
  if (traj_x.variable != Variable::Physical) throw std::invalid_argument("vi_slack expects a physical trajectory");
  require_every_step(traj_x);
  if (pair.z.size() != traj_x.states.size() || pair.g.size() != traj_x.states.size()) {
    throw GridMismatch("test process and trajectory have different time grids");
  }
  require_same_grid(pair.z0.grid(), traj_x.states[0].grid());
  const double dt = traj_x.config.dt;
  const double lambda = traj_x.config.lambda;
  const ScalarField& x = traj_x.states[0];
  const double d0 = l2_norm(x - pair.z[0]);
  std::vector<double> slack;
  slack.reserve(pair.z.size());
  double int_phi_x = 0.0, int_phi_z = 0.0, int_g = 0.0;
  double prev_x = 0.0, prev_z = 0.0, prev_g = 0.0;
  for (std::size_t k = 0; k < pair.z.size(); ++k) {
    const ScalarField& xk = traj_x.states[k];
    const ScalarField& zk = pair.z[k];
    const ScalarField diff = xk - zk;
    const double px = phi_of(xk, mode, lambda);
    const double pz = phi_of(zk, mode, lambda);
    const double gk = inner(pair.g[k], diff);
    if (k > 0) {
      int_phi_x += 0.5 * dt * (prev_x + px);
      int_phi_z += 0.5 * dt * (prev_z + pz);
      int_g += 0.5 * dt * (prev_g + gk);
    }
    prev_x = px;
    prev_z = pz;
    prev_g = gk;
    const double dk = l2_norm(diff);
    slack.push_back(0.5 * d0 * d0 + int_phi_z + int_g - 0.5 * dk * dk - int_phi_x);
  }
  return slack;
}

std::vector<TestProcessPair> standard_vi_battery(const Trajectory& traj_x, const BrownianPath& path) {
  require_every_step(traj_x);
  const SolverConfig& cfg = traj_x.config;
  const GridPtr& grid = cfg.grid;
  const double r = grid->radius();
  const std::size_t count = traj_x.states.size();
  std::vector<TestProcessPair> out;

  out.push_back(build_test_process(std::vector<ScalarField>(count, ScalarField(grid)), ScalarField(grid), path,
                                   cfg.transport, "zero"));

  ScalarField half = ScalarField::from_function(grid, [](Vec2) { return 0.5; });
  out.push_back(build_test_process(std::vector<ScalarField>(count, half),
                                   gaussian(grid, {-0.2 * r, 0.2 * r}, 0.25 * r, 0.5), path, cfg.transport,
                                   "constant"));

  out.push_back(build_test_process(std::vector<ScalarField>(count, ScalarField(grid)),
                                   gaussian(grid, {0.4 * r, -0.3 * r}, 0.15 * r, 1.0), path, cfg.transport,
                                   "transported-bump"));

  std::vector<ScalarField> drift;
  drift.reserve(count);
  for (const auto& s : traj_x.states) drift.push_back(-1.0 * div_psi_tilde(s, cfg.lambda));
  out.push_back(build_test_process(std::move(drift), traj_x.states[0], path, cfg.transport, "realized-drift"));

  // Fixed coefficients: the battery is part of the versioned test definition.
  std::mt19937_64 rng(0x7e57ba77e21ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr int kModes = 4;
  double amp[kModes];
  double phase[kModes];
  for (int m = 0; m < kModes; ++m) {
    amp[m] = 0.5 * unif(rng);
    phase[m] = std::numbers::pi * unif(rng);
  }
  std::vector<ScalarField> basis;
  for (int m = 0; m < kModes; ++m) {
    const int a = 1 + m % 2;
    const int b = 1 + m / 2;
    basis.push_back(ScalarField::from_function(grid, [=](Vec2 p) {
      return std::sin(a * std::numbers::pi * (p.x + r) / (2.0 * r)) *
             std::sin(b * std::numbers::pi * (p.y + r) / (2.0 * r));
    }));
  }
  std::vector<ScalarField> smooth;
  smooth.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double drive = 0.0;
    for (double v : path.at(static_cast<int>(k))) drive += v;
    ScalarField gk(grid);
    for (int m = 0; m < kModes; ++m) gk.axpy(amp[m] * std::cos((m + 1) * drive + phase[m]), basis[m]);
    smooth.push_back(std::move(gk));
  }
  out.push_back(build_test_process(std::move(smooth), ScalarField(grid), path, cfg.transport, "path-smooth"));
  return out;
}

// ---------------------------------------------------------------------------

double sobolev_quotient(const ScalarField& y) {
  const double n = l2_norm(y);
  if (n == 0.0) throw std::invalid_argument("quotient undefined for y == 0");
  return tv_phi(y) / n;
}

ScalarField random_nonnegative_field(const GridPtr& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ScalarField y(grid);
  for (auto c : grid->mask_cells()) y[c] = unif(rng);
  ScalarField s = resolvent(y, std::pow(3.0 * grid->h(), 2));
  double mean = 0.0;
  for (auto c : grid->mask_cells()) mean += s[c];
  mean /= static_cast<double>(grid->mask_count());
  for (auto c : grid->mask_cells()) s[c] = std::max(0.0, s[c] - mean);
  const double top = s.max_value();
  if (top > 0.0) s *= 1.0 / top;
  return s;
}

double continuum_rho() { return 2.0 * std::sqrt(std::numbers::pi); }

double estimate_rho(const GridPtr& grid, const RhoOptions& opts) {
  if (!grid || grid->mask_count() == 0) throw std::invalid_argument("degenerate grid");
  const double r = grid->radius();
  std::vector<ScalarField> starts;
  for (double f : {0.25, 0.5, 0.75, 0.95}) {
    starts.push_back(ScalarField::from_function(grid, [=](Vec2 p) { return norm(p) < f * r ? 1.0 : 0.0; }));
  }
  starts.push_back(ScalarField::from_function(grid, [=](Vec2 p) { return norm(p - Vec2{0.3 * r, 0.0}) < 0.4 * r; }));
  for (double f : {0.3, 0.6}) {
    starts.push_back(ScalarField::from_function(
        grid, [=](Vec2 p) { return std::abs(p.x) < f * r && std::abs(p.y) < f * r ? 1.0 : 0.0; }));
  }
  starts.push_back(gaussian(grid, {0.0, 0.0}, 0.3 * r, 1.0));
  starts.push_back(ScalarField::from_function(grid, [=](Vec2 p) { return std::max(0.0, 1.0 - norm(p) / r); }));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double eps = std::pow(4.0 * grid->h(), 2);
  for (int s = 0; s < opts.random_starts; ++s) {
    ScalarField y(grid);
    for (auto c : grid->mask_cells()) y[c] = unif(rng);
    starts.push_back(resolvent(y, eps));
  }

  double best = std::numeric_limits<double>::infinity();
  for (ScalarField y : starts) {
    if (l2_norm(y) == 0.0) continue;
    y *= 1.0 / l2_norm(y);
    best = std::min(best, tv_phi(y));
    for (int it = 0; it < opts.iterations; ++it) {
      VectorField2 p = gradient(y);
      auto px = p.x();
      auto py = p.y();
      for (std::size_t k = 0; k < px.size(); ++k) {
        const double m = std::hypot(px[k], py[k]);
        px[k] = m > 0.0 ? px[k] / m : 0.0;
        py[k] = m > 0.0 ? py[k] / m : 0.0;
      }
      ScalarField sub = -1.0 * divergence(p);
      sub.axpy(-inner(sub, y), y);
      const double sn = l2_norm(sub);
      if (sn == 0.0) break;
      y.axpy(-0.1 / std::sqrt(it + 1.0) / sn, sub);
      for (auto c : grid->mask_cells()) y[c] = std::max(0.0, y[c]);
      const double yn = l2_norm(y);
      if (yn == 0.0) break;
      y *= 1.0 / yn;
      best = std::min(best, tv_phi(y));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

ContractionReport contraction_check(const Trajectory& a, const Trajectory& b, double tol) {
  if (a.states.empty() || b.states.empty()) throw std::invalid_argument("empty trajectory");
  ContractionReport rep;
  rep.initial_gap = l2_norm(a.states.front() - b.states.front());
  rep.sup_gap = sup_l2_gap(a, b);
  rep.min_value = std::min(a.min_value(), b.min_value());
  for (const Trajectory* t : {&a, &b}) {
    const double x = t->initial_norm();
    if (x == 0.0) continue;
    for (const auto& d : t->diagnostics) rep.max_norm_ratio = std::max(rep.max_norm_ratio, d.l2_norm / x);
  }
  rep.pass = rep.sup_gap <= rep.initial_gap * (1.0 + tol);
  return rep;
}

ContractionReport contraction_check(const ScalarField& x, const ScalarField& x_star, const BrownianPath& path,
                                    const SolverConfig& cfg, double tol) {
  return contraction_check(solve(x, path, cfg), solve(x_star, path, cfg), tol);
}

// ---------------------------------------------------------------------------

std::pair<double, double> wilson_interval(int k, int m) {
  if (m <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double p = static_cast<double>(k) / m;
  const double den = 1.0 + z * z / m;
  const double centre = (p + z * z / (2.0 * m)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / m + z * z / (4.0 * m * m)) / den;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == m ? 1.0 : std::min(1.0, centre + half)};
}

EnsembleStats ensemble_stats(const std::vector<SampleSeries>& samples, double dt, double x_norm, double rho) {
  EnsembleStats st;
  st.x_norm = x_norm;
  st.rho = rho;
  std::vector<const SampleSeries*> ok;
  for (const auto& s : samples) {
    if (s.error.empty()) ok.push_back(&s);
  }
  if (ok.empty()) return st;
  const std::size_t steps = ok.front()->l2_norm.size();
  const double m = static_cast<double>(ok.size());
  double alive_integral = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = dt * static_cast<double>(k);
    double sum = 0.0, sum2 = 0.0, phi = 0.0, mn = 0.0, alive = 0.0;
    for (const SampleSeries* s : ok) {
      const double v = s->l2_norm[k];
      sum += v;
      sum2 += v * v;
      phi += s->phi_lambda[k];
      mn += s->min_value[k];
      if (!s->tau || t < *s->tau) alive += 1.0;
    }
    const double mean = sum / m;
    const double var = ok.size() > 1 ? std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0)) : 0.0;
    st.times.push_back(t);
    st.mean_norm.push_back(mean);
    st.ci_norm.push_back(1.959963984540054 * std::sqrt(var / m));
    st.mean_phi.push_back(phi / m);
    st.mean_min.push_back(mn / m);
    st.alive.push_back(alive / m);
    if (k > 0) alive_integral += 0.5 * dt * (st.alive[k - 1] + st.alive[k]);
    st.la1_lhs.push_back(mean + rho * alive_integral);
    if (x_norm > 0.0) st.la1_ratio = std::max(st.la1_ratio, st.la1_lhs.back() / x_norm);
  }
  return st;
}

ExtinctionReport extinction_study(const ScalarField& x0, const SolverConfig& cfg_in,
                                  const std::vector<std::uint64_t>& seeds, double rho_hat,
                                  const ExtinctionOptions& opts) {
  SolverConfig cfg = cfg_in;
  cfg.state_stride = 1;
  cfg.validate();
  if (!(rho_hat > 0.0)) throw std::invalid_argument("rho_hat must be positive");
  const int dims = static_cast<int>(cfg.transport.size());
  const int steps = cfg.steps();
  ExtinctionReport rep;
  rep.x_norm = l2_norm(x0);
  rep.rho_hat = rho_hat;
  rep.horizon = cfg.horizon;
  const bool deterministic = seeds.empty();
  const std::size_t count = deterministic ? 1 : seeds.size();
  rep.samples.resize(count);

  auto make_path = [&](std::size_t i) {
    if (deterministic || dims == 0) return BrownianPath::zero(dims, cfg.horizon, cfg.dt);
    return BrownianPath::sample(seeds[i], dims, cfg.horizon, cfg.dt);
  };
  auto record = [&](SampleSeries& s, const ScalarField& x, int k) {
    s.l2_norm.push_back(l2_norm(x));
    s.phi_lambda.push_back(phi_lambda(x, cfg.lambda));
    s.min_value.push_back(x.min_value());
    if (!s.tau && s.l2_norm.back() <= opts.threshold * rep.x_norm) s.tau = k * cfg.dt;
  };

  std::optional<Trajectory> shared_y;
  if (cfg.scheme == Scheme::Rescaled && cfg.frame == FrameMode::Equivariant) {
    shared_y = solve_rescaled(x0, BrownianPath::zero(dims, cfg.horizon, cfg.dt), cfg);
  }

  const auto errors = parallel_for(count, opts.workers, [&](std::size_t i) {
    SampleSeries& s = rep.samples[i];
    s.seed = deterministic ? 0 : seeds[i];
    const BrownianPath path = make_path(i);
    if (shared_y) {
      for (int k = 0; k <= steps; ++k) {
        const ScalarField& y = shared_y->states[static_cast<std::size_t>(k)];
        record(s, path.is_zero() ? y : group_apply_multi(y, cfg.transport, path.at(k)), k);
      }
    } else {
      const Trajectory tr = solve(x0, path, cfg);
      for (int k = 0; k <= steps; ++k) record(s, tr.states[static_cast<std::size_t>(k)], k);
    }
  });
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      rep.samples[i].error = e.what();
    }
  }

  int valid = 0;
  for (const auto& s : rep.samples) {
    if (!s.error.empty()) {
      ++rep.failed;
    } else {
      ++valid;
      if (!s.tau) ++rep.censored;
    }
  }

  rep.t_grid = opts.t_grid;
  if (rep.t_grid.empty()) {
    for (int k = 1; k <= 50; ++k) rep.t_grid.push_back(cfg.horizon * k / 50.0);
  }
  for (double t : rep.t_grid) {
    int alive = 0;
    for (const auto& s : rep.samples) {
      if (s.error.empty() && (!s.tau || *s.tau > t)) ++alive;
    }
    const auto [lo, hi] = wilson_interval(alive, valid);
    const double surv = valid > 0 ? static_cast<double>(alive) / valid : 0.0;
    const double bound = rep.x_norm == 0.0 ? 0.0 : std::min(1.0, rep.x_norm / (rho_hat * t));
    rep.survival.push_back(surv);
    rep.survival_lower.push_back(lo);
    rep.survival_upper.push_back(hi);
    rep.bound.push_back(bound);
    if (bound < 1.0 && lo > bound) rep.dominated = false;
  }
  rep.stats = ensemble_stats(rep.samples, cfg.dt, rep.x_norm, rho_hat);
  return rep;
}

}  // namespace tvflow
