// SPDX-License-Identifier: Apache-2.0
#include "tvflow/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "tvflow/error.hpp"
#include "tvflow/io.hpp"
#include "tvflow/parallel.hpp"
#include "tvflow/regularization.hpp"
#include "tvflow/verify.hpp"

#ifndef TVFLOW_VERSION
#define TVFLOW_VERSION "0.0.0"
#endif

namespace tvflow {

using nlohmann::json;

std::string version() { return TVFLOW_VERSION; }

int default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---------------------------------------------------------------------------

std::string RunManifest::to_json() const {
  json j;
  j["format"] = "tvflow-manifest/1";
  j["version"] = version;
  j["study"] = study;
  j["config"] = config_text;
  j["seeds"] = seeds;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["outputs"] = json::array();
  for (const auto& o : outputs) j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"relation", c.relation}, {"pass", c.pass}});
  }
  j["info"] = json::object();
  for (const auto& [k, v] : info) j["info"][k] = v;
  j["errors"] = errors;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "tvflow-manifest/1") throw FormatError("not a tvflow manifest");
    m.version = j.at("version").get<std::string>();
    m.study = j.at("study").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    for (const auto& o : j.at("outputs")) {
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                           o.at("bytes").get<std::uintmax_t>()});
    }
    for (const auto& c : j.at("checks")) {
      CheckResult r;
      r.name = c.at("name").get<std::string>();
      r.value = c.at("value").is_number() ? c.at("value").get<double>() : std::numeric_limits<double>::quiet_NaN();
      r.tolerance = c.at("tolerance").get<double>();
      r.relation = c.at("relation").get<std::string>();
      r.pass = c.at("pass").get<bool>();
      m.checks.push_back(r);
    }
    for (const auto& [k, v] : j.at("info").items()) m.info.emplace_back(k, v.is_number() ? v.get<double>() : 0.0);
    m.errors = j.at("errors").get<std::vector<std::string>>();
    m.pass = j.at("pass").get<bool>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

struct Context {
  RunConfig rc;
  std::filesystem::path out;
  int workers = 1;
  std::ostream* log = nullptr;
  GridPtr grid;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> info;
  std::vector<std::string> errors;
  std::vector<std::string> files;
  std::optional<double> rho;

  void note(const std::string& msg) const {
    if (log) *log << "[tvflow] " << msg << '\n';
  }

  void check(const std::string& name, double value, double tol, const std::string& rel = "<=") {
    const bool ok = rel == "<=" ? value <= tol : value >= tol;
    checks.push_back({name, value, tol, rel, ok && std::isfinite(value)});
  }

  std::ofstream open(const std::string& rel) {
    const auto p = out / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + p.string());
    files.push_back(rel);
    return f;
  }

  double rho_hat() {
    if (!rho) {
      note("estimating the discrete Sobolev constant");
      rho = estimate_rho(grid);
      info.emplace_back("rho_hat", *rho);
      info.emplace_back("rho_continuum", continuum_rho());
    }
    return *rho;
  }

  std::vector<std::uint64_t> seeds() const { return rc.seeds(); }

  /// Path for sample i; the deterministic path when no seeds are configured.
  BrownianPath path(std::size_t i, const SolverConfig& cfg) const {
    const int dims = static_cast<int>(cfg.transport.size());
    if (rc.seed_count == 0 || dims == 0) return BrownianPath::zero(dims, cfg.horizon, cfg.dt);
    return BrownianPath::sample(rc.seed_base + i, dims, cfg.horizon, cfg.dt);
  }

  std::string label(std::size_t i) const {
    return rc.seed_count == 0 ? std::string("zero") : "seed" + std::to_string(rc.seed_base + i);
  }

  std::size_t sample_count() const { return rc.seed_count == 0 ? 1 : static_cast<std::size_t>(rc.seed_count); }

  void record_errors(const std::vector<std::exception_ptr>& errs) {
    for (std::size_t i = 0; i < errs.size(); ++i) {
      if (!errs[i]) continue;
      try {
        std::rethrow_exception(errs[i]);
      } catch (const std::exception& e) {
        errors.push_back(label(i) + ": " + e.what());
      }
    }
  }
};

double horizon_for(Context& ctx, const ScalarField& x0) {
  const RunConfig& rc = ctx.rc;
  if (rc.horizon) return *rc.horizon;
  if (rc.study != Study::Extinction && rc.study != Study::Ensemble) {
    throw FormatError("horizon: required for study " + to_string(rc.study));
  }
  const double t = rc.horizon_factor * l2_norm(x0) / ctx.rho_hat();
  return std::max(1.0, std::ceil(t / rc.dt - 1e-9)) * rc.dt;
}

void write_path(Context& ctx, const BrownianPath& p, const std::string& label) {
  if (p.is_zero()) return;
  auto f = ctx.open("paths/path_" + label + ".csv");
  p.write_csv(f);
}

void write_states(Context& ctx, const Trajectory& tr, const std::string& label) {
  if (ctx.rc.state_stride <= 0) return;
  const bool binary = ctx.rc.state_format == "binary";
  for (std::size_t s = 0; s < tr.states.size(); ++s) {
    const std::string name = "states/" + label + "_k" + std::to_string(tr.state_steps[s]) + (binary ? ".bin" : ".csv");
    auto f = ctx.open(name);
    if (binary) {
      write_state_binary(tr.states[s], f);
    } else {
      write_state_csv(tr.states[s], f);
    }
  }
}

void positivity_check(Context& ctx, const std::string& name, const ScalarField& x0, double min_value) {
  const double top = x0.max_value();
  if (x0.min_value() < 0.0 || top <= 0.0) return;
  ctx.check(name, min_value / top, -1e-12, ">=");
}

void study_single(Context& ctx, const ScalarField& x0, SolverConfig cfg) {
  const std::size_t count = ctx.sample_count();
  cfg.state_stride = ctx.rc.state_stride > 0 ? ctx.rc.state_stride : cfg.steps();
  std::vector<std::optional<Trajectory>> results(count);
  ctx.note("single: " + std::to_string(count) + " path(s), " + std::to_string(cfg.steps()) + " steps");
  const auto errs = parallel_for(count, ctx.workers, [&](std::size_t i) { results[i] = solve(x0, ctx.path(i, cfg), cfg); });
  ctx.record_errors(errs);
  const double x2 = std::pow(l2_norm(x0), 2);
  for (std::size_t i = 0; i < count; ++i) {
    if (!results[i]) continue;
    const Trajectory& tr = *results[i];
    const std::string lab = ctx.label(i);
    {
      auto f = ctx.open("trajectory_" + lab + ".csv");
      write_diagnostics_csv(tr, f);
    }
    write_path(ctx, ctx.path(i, cfg), lab);
    write_states(ctx, tr, lab);
    if (x2 > 0.0) {
      ctx.check("energy_residual/" + lab, tr.max_abs_energy_residual() / x2, ctx.rc.energy_tol);
      double ratio = 0.0;
      for (const auto& d : tr.diagnostics) ratio = std::max(ratio, d.l2_norm / std::sqrt(x2));
      ctx.check("norm_ratio/" + lab, ratio, 1.0 + ctx.rc.contraction_tol);
    }
    positivity_check(ctx, "positivity/" + lab, x0, tr.min_value());
    if (tr.cfl_warnings > 0) ctx.note(lab + ": " + std::to_string(tr.cfl_warnings) + " steps exceeded the transport CFL heuristic");
  }
}

void write_ensemble(Context& ctx, const EnsembleStats& st) {
  auto f = ctx.open("ensemble.csv");
  CsvWriter w(f);
  w.row({"t", "mean_l2_norm", "ci95_l2_norm", "mean_phi_lambda", "mean_min_value", "alive_fraction", "la1_lhs"});
  for (std::size_t k = 0; k < st.times.size(); ++k) {
    w.field(st.times[k]).field(st.mean_norm[k]).field(st.ci_norm[k]).field(st.mean_phi[k]).field(st.mean_min[k]);
    w.field(st.alive[k]).field(st.la1_lhs[k]);
    w.end_row();
  }
}

void study_extinction(Context& ctx, const ScalarField& x0, const SolverConfig& cfg, bool full) {
  const double rho = ctx.rho_hat();
  ExtinctionOptions opts;
  opts.threshold = ctx.rc.extinction_threshold;
  opts.workers = ctx.workers;
  ctx.note(std::string(full ? "extinction" : "ensemble") + ": " + std::to_string(ctx.rc.seed_count) + " seeds, T = " +
           format_double(cfg.horizon));
  const ExtinctionReport rep = extinction_study(x0, cfg, ctx.seeds(), rho, opts);
  for (const auto& s : rep.samples) {
    if (!s.error.empty()) ctx.errors.push_back("seed" + std::to_string(s.seed) + ": " + s.error);
  }
  ctx.info.emplace_back("horizon", cfg.horizon);
  ctx.info.emplace_back("x_norm", rep.x_norm);
  write_ensemble(ctx, rep.stats);
  ctx.check("la1_ratio", rep.stats.la1_ratio, 1.0 + ctx.rc.ensemble_tol);
  if (!full) return;
  {
    auto f = ctx.open("extinction_samples.csv");
    CsvWriter w(f);
    w.row({"seed", "tau", "censored", "error"});
    for (const auto& s : rep.samples) {
      w.field(s.seed);
      if (s.tau) {
        w.field(*s.tau);
      } else {
        w.field(std::string());
      }
      w.field(std::string(s.error.empty() && !s.tau ? "1" : "0")).field(s.error);
      w.end_row();
    }
  }
  double excess = -std::numeric_limits<double>::infinity();
  {
    auto f = ctx.open("survival.csv");
    CsvWriter w(f);
    w.row({"t", "survival", "lower95", "upper95", "bound"});
    for (std::size_t k = 0; k < rep.t_grid.size(); ++k) {
      w.field(rep.t_grid[k]).field(rep.survival[k]).field(rep.survival_lower[k]).field(rep.survival_upper[k]);
      w.field(rep.bound[k]);
      w.end_row();
      if (rep.bound[k] < 1.0) excess = std::max(excess, rep.survival_lower[k] - rep.bound[k]);
    }
  }
  ctx.check("censored_samples", rep.censored, 0.0);
  if (std::isfinite(excess)) ctx.check("survival_excess_over_bound", excess, 0.0);
}

void study_sweep(Context& ctx, const ScalarField& x0, SolverConfig cfg) {
  cfg.state_stride = ctx.rc.state_stride > 0 ? ctx.rc.state_stride : 1;
  const BrownianPath path = ctx.path(0, cfg);
  const auto& lams = ctx.rc.lambdas;
  ctx.note("lambda-sweep over " + std::to_string(lams.size()) + " values");
  std::vector<std::optional<Trajectory>> results(lams.size());
  const auto errs = parallel_for(lams.size(), ctx.workers, [&](std::size_t i) {
    SolverConfig c = cfg;
    c.lambda = lams[i];
    results[i] = solve(x0, path, c);
  });
  for (std::size_t i = 0; i < errs.size(); ++i) {
    if (!errs[i]) continue;
    try {
      std::rethrow_exception(errs[i]);
    } catch (const std::exception& e) {
      ctx.errors.push_back("lambda " + format_double(lams[i]) + ": " + e.what());
    }
  }
  if (!ctx.errors.empty()) return;
  LambdaSweep sw;
  sw.lambdas = lams;
  for (std::size_t i = 0; i < lams.size(); ++i) sw.trajectories.emplace(lams[i], std::move(*results[i]));
  sw.gaps.assign(lams.size(), std::vector<double>(lams.size(), 0.0));
  {
    auto f = ctx.open("lambda_gaps.csv");
    CsvWriter w(f);
    w.row({"lambda_a", "lambda_b", "sup_l2_gap"});
    for (std::size_t i = 0; i < lams.size(); ++i) {
      for (std::size_t j = i + 1; j < lams.size(); ++j) {
        sw.gaps[i][j] = sw.gaps[j][i] = sup_l2_gap(sw.trajectories.at(lams[i]), sw.trajectories.at(lams[j]));
        w.field(lams[i]).field(lams[j]).field(sw.gaps[i][j]);
        w.end_row();
      }
    }
  }
  for (const double lam : lams) {
    auto f = ctx.open("trajectory_lambda" + format_double(lam) + ".csv");
    write_diagnostics_csv(sw.trajectories.at(lam), f);
  }
  write_path(ctx, path, ctx.label(0));
  const double e = fitted_gap_exponent(sw);
  ctx.check("gap_exponent_min", e, ctx.rc.exponent_min, ">=");
  ctx.check("gap_exponent_max", e, ctx.rc.exponent_max, "<=");
}

void study_vi(Context& ctx, const ScalarField& x0, SolverConfig cfg) {
  cfg.state_stride = 1;
  const std::size_t count = ctx.sample_count();
  const double tol = ctx.rc.vi_tol * (1.0 + std::pow(l2_norm(x0), 2));
  struct Result {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> slack;
    std::vector<double> times;
  };
  std::vector<std::optional<Result>> results(count);
  ctx.note("vi-check: " + std::to_string(count) + " path(s), battery " + kViBatteryVersion);
  const auto errs = parallel_for(count, ctx.workers, [&](std::size_t i) {
    const BrownianPath path = ctx.path(i, cfg);
    const Trajectory tr = solve(x0, path, cfg);
    Result r;
    for (const auto& d : tr.diagnostics) r.times.push_back(d.time);
    for (const auto& pair : standard_vi_battery(tr, path)) {
      r.labels.push_back(pair.label);
      r.slack.push_back(vi_slack(tr, pair));
    }
    results[i] = std::move(r);
  });
  ctx.record_errors(errs);
  ctx.info.emplace_back("vi_tolerance", tol);
  for (std::size_t i = 0; i < count; ++i) {
    if (!results[i]) continue;
    const Result& r = *results[i];
    const std::string lab = ctx.label(i);
    auto f = ctx.open("vi_" + lab + ".csv");
    CsvWriter w(f);
    w.field(std::string("t"));
    for (const auto& l : r.labels) w.field(l);
    w.end_row();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      w.field(r.times[k]);
      for (const auto& s : r.slack) w.field(s[k]);
      w.end_row();
    }
    for (std::size_t p = 0; p < r.labels.size(); ++p) {
      ctx.check("vi_min_slack/" + lab + "/" + r.labels[p], *std::min_element(r.slack[p].begin(), r.slack[p].end()),
                -tol, ">=");
    }
  }
}

void study_contraction(Context& ctx, SolverConfig cfg) {
  cfg.state_stride = 1;
  const std::size_t paths = ctx.sample_count();
  const std::size_t pairs = static_cast<std::size_t>(ctx.rc.contraction_pairs);
  std::vector<std::optional<ContractionReport>> results(paths * pairs);
  std::vector<double> tops(paths * pairs, 0.0);
  ctx.note("contraction: " + std::to_string(pairs) + " pairs x " + std::to_string(paths) + " path(s)");
  const auto errs = parallel_for(results.size(), ctx.workers, [&](std::size_t idx) {
    const std::size_t i = idx / pairs;
    const std::size_t p = idx % pairs;
    const ScalarField a = random_nonnegative_field(cfg.grid, mix_seed(ctx.rc.seed_base, 2 * p));
    const ScalarField b = random_nonnegative_field(cfg.grid, mix_seed(ctx.rc.seed_base, 2 * p + 1));
    tops[idx] = std::max(a.max_value(), b.max_value());
    results[idx] = contraction_check(a, b, ctx.path(i, cfg), cfg, ctx.rc.contraction_tol);
  });
  for (std::size_t idx = 0; idx < errs.size(); ++idx) {
    if (!errs[idx]) continue;
    try {
      std::rethrow_exception(errs[idx]);
    } catch (const std::exception& e) {
      ctx.errors.push_back(ctx.label(idx / pairs) + " pair " + std::to_string(idx % pairs) + ": " + e.what());
    }
  }
  auto f = ctx.open("contraction.csv");
  CsvWriter w(f);
  w.row({"path", "pair", "initial_gap", "sup_gap", "gap_ratio", "max_norm_ratio", "min_value", "pass"});
  double worst_gap = 0.0, worst_norm = 0.0, worst_min = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    if (!results[idx]) continue;
    const ContractionReport& r = *results[idx];
    const double ratio = r.initial_gap > 0.0 ? r.sup_gap / r.initial_gap : 0.0;
    w.field(ctx.label(idx / pairs)).field(static_cast<long long>(idx % pairs)).field(r.initial_gap).field(r.sup_gap);
    w.field(ratio).field(r.max_norm_ratio).field(r.min_value).field(std::string(r.pass ? "1" : "0"));
    w.end_row();
    worst_gap = std::max(worst_gap, ratio);
    worst_norm = std::max(worst_norm, r.max_norm_ratio);
    worst_min = std::min(worst_min, r.min_value / tops[idx]);
  }
  ctx.check("contraction_gap_ratio", worst_gap, 1.0 + ctx.rc.contraction_tol);
  ctx.check("norm_ratio", worst_norm, 1.0 + ctx.rc.contraction_tol);
  if (std::isfinite(worst_min)) ctx.check("positivity", worst_min, -1e-12, ">=");
}

void study_properties(Context& ctx) {
  const GridPtr& grid = ctx.grid;
  std::mt19937_64 rng(ctx.rc.seed_base);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_field = [&] {
    ScalarField u(grid);
    for (auto c : grid->mask_cells()) u[c] = unif(rng);
    return u;
  };
  double duality = 0.0;
  double skew = 0.0;
  const TransportFieldSpec spec(ctx.rc.omegas.empty() ? 1.0 : ctx.rc.omegas.front());
  for (int t = 0; t < 100; ++t) {
    VectorField2 p(grid);
    const std::size_t s = static_cast<std::size_t>(grid->stride());
    for (auto c : grid->mask_cells()) {
      // Gradient cells: every mask cell plus its left and lower neighbours.
      for (std::size_t q : {c, c - 1, c - s}) p.set(q, {unif(rng), unif(rng)});
    }
    const ScalarField u = random_field();
    const ScalarField v = random_field();
    duality = std::max(duality, std::abs(inner(divergence(p), u) + inner(p, gradient(u))));
    skew = std::max(skew, std::abs(inner(b_operator(u, spec), v) + inner(u, b_operator(v, spec))));
  }
  ctx.check("duality_div_grad", duality, 1e-12);
  ctx.check("skew_adjoint_b", skew, 1e-12);

  std::uniform_real_distribution<double> mag(0.0, 3.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.141592653589793);
  const double lam = ctx.rc.lambda;
  double fd = 0.0, gap = -std::numeric_limits<double>::infinity(), oracle = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const double m = mag(rng) * lam;
    const double a = ang(rng);
    const Vec2 u{m * std::cos(a), m * std::sin(a)};
    const double r = norm(u);
    gap = std::max(gap, std::abs(moreau_j(u, lam) - r) - 0.5 * lam);
    if (t < 1000 && std::abs(r - lam) > 1e-4) {
      const double e = 1e-5;
      const Vec2 g{(moreau_j(u + Vec2{e, 0}, lam) - moreau_j(u - Vec2{e, 0}, lam)) / (2 * e),
                   (moreau_j(u + Vec2{0, e}, lam) - moreau_j(u - Vec2{0, e}, lam)) / (2 * e)};
      fd = std::max(fd, norm(g - psi_lambda(u, lam)));
    }
    if (t < 20) {
      // Two-level grid search of inf_v |u - v|^2 / (2 lambda) + |v| over a box around u.
      auto cost = [&](Vec2 v) { const Vec2 d = u - v; return dot(d, d) / (2 * lam) + norm(v); };
      Vec2 best = u;
      double bc = cost(u);
      double half = r + lam;
      for (int level = 0; level < 3; ++level) {
        const Vec2 centre = best;
        const int m = 200;
        for (int ix = -m; ix <= m; ++ix) {
          for (int iy = -m; iy <= m; ++iy) {
            const Vec2 v = centre + Vec2{half * ix / m, half * iy / m};
            const double cv = cost(v);
            if (cv < bc) {
              bc = cv;
              best = v;
            }
          }
        }
        half *= 4.0 / m;
      }
      oracle = std::max(oracle, std::abs(bc - moreau_j(u, lam)));
    }
  }
  ctx.check("psi_equals_grad_j", fd, 1e-6);
  ctx.check("moreau_closed_form", oracle, 1e-4);
  ctx.check("moreau_gap_minus_half_lambda", gap, 0.0);

  auto f = ctx.open("properties.csv");
  CsvWriter w(f);
  w.row({"name", "value", "tolerance", "pass"});
  for (const auto& c : ctx.checks) {
    w.field(c.name).field(c.value).field(c.tolerance).field(std::string(c.pass ? "1" : "0"));
    w.end_row();
  }
}

std::string summary_json(const Context& ctx, bool pass) {
  json j;
  j["study"] = to_string(ctx.rc.study);
  j["pass"] = pass;
  j["seeds"] = ctx.seeds();
  j["vi_battery"] = kViBatteryVersion;
  j["checks"] = json::array();
  for (const auto& c : ctx.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"relation", c.relation}, {"pass", c.pass}});
  }
  j["info"] = json::object();
  for (const auto& [k, v] : ctx.info) j["info"][k] = v;
  j["errors"] = ctx.errors;
  return j.dump(2) + "\n";
}

}  // namespace

RunManifest run(RunConfig config, const RunOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  if (opts.output_dir) config.output_dir = *opts.output_dir;
  if (opts.seed_base) config.seed_base = *opts.seed_base;
  Context ctx;
  ctx.rc = config;
  ctx.out = config.output_dir;
  ctx.workers = opts.workers > 0 ? opts.workers : default_workers();
  ctx.log = opts.log;
  std::filesystem::create_directories(ctx.out);
  ctx.grid = Grid::build(config.radius, config.n);

  try {
    if (config.study == Study::UnitProperties) {
      study_properties(ctx);
    } else if (config.study == Study::Contraction) {
      SolverConfig cfg = make_solver_config(config, ctx.grid);
      if (!config.horizon) throw FormatError("horizon: required for study contraction");
      cfg.horizon = *config.horizon;
      study_contraction(ctx, cfg);
    } else {
      const ScalarField x0 = make_initial(config, ctx.grid);
      SolverConfig cfg = make_solver_config(config, ctx.grid);
      cfg.horizon = horizon_for(ctx, x0);
      cfg.validate();
      switch (config.study) {
        case Study::Single: study_single(ctx, x0, cfg); break;
        case Study::Ensemble: study_extinction(ctx, x0, cfg, false); break;
        case Study::Extinction: study_extinction(ctx, x0, cfg, true); break;
        case Study::LambdaSweep: study_sweep(ctx, x0, cfg); break;
        case Study::ViCheck: study_vi(ctx, x0, cfg); break;
        default: break;
      }
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  } catch (const std::exception& e) {
    ctx.errors.push_back(e.what());
  }

  bool pass = ctx.errors.empty();
  for (const auto& c : ctx.checks) pass = pass && c.pass;
  {
    auto f = ctx.open("summary.json");
    f << summary_json(ctx, pass);
  }

  RunManifest m;
  m.version = version();
  m.study = to_string(config.study);
  m.config_text = config.to_text();
  m.seeds = config.seeds();
  m.checks = ctx.checks;
  m.info = ctx.info;
  m.errors = ctx.errors;
  m.pass = pass;
  std::sort(ctx.files.begin(), ctx.files.end());
  for (const auto& rel : ctx.files) {
    const auto p = ctx.out / rel;
    m.outputs.push_back({rel, sha256_file(p), std::filesystem::file_size(p)});
  }
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::ofstream mf(ctx.out / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << m.to_json();
  ctx.note(std::string("done: ") + (pass ? "pass" : "FAIL") + ", " + std::to_string(m.outputs.size()) + " files");
  return m;
}

ReproduceReport verify_manifest(const std::filesystem::path& manifest, const RunOptions& opts) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + manifest.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const RunManifest orig = RunManifest::from_json(buf.str());
  std::istringstream cfg_text(orig.config_text);
  RunConfig rc = parse_config(cfg_text, manifest.string() + "#config");
  RunOptions o = opts;
  o.seed_base.reset();
  if (!o.output_dir) o.output_dir = std::filesystem::absolute(manifest).parent_path() / "reproduce";
  ReproduceReport rep;
  rep.rerun = run(rc, o);
  std::map<std::string, std::string> fresh;
  for (const auto& f : rep.rerun.outputs) fresh[f.path] = f.sha256;
  std::set<std::string> listed;
  for (const auto& f : orig.outputs) {
    listed.insert(f.path);
    const auto it = fresh.find(f.path);
    if (it == fresh.end()) {
      rep.mismatches.push_back(f.path + ": missing in rerun");
    } else if (it->second != f.sha256) {
      rep.mismatches.push_back(f.path + ": content differs");
    }
  }
  for (const auto& [path, hash] : fresh) {
    if (!listed.count(path)) rep.mismatches.push_back(path + ": not in the original manifest");
  }
  rep.identical = rep.mismatches.empty();
  return rep;
}

}  // namespace tvflow
