// SPDX-License-Identifier: Apache-2.0
//
// Checks of the defining inequalities: the stochastic variational inequality
// tested against solutions of the linear noise equation, L2 contraction, and
// the extinction-time law in two dimensions.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvflow/grid.hpp"
#include "tvflow/noise.hpp"
#include "tvflow/solver.hpp"
#include "tvflow/transport.hpp"

namespace tvflow {

/// Test process Z solving dZ = -G dt + 1/2 sum B_i^2 Z dt + sum B_i Z dbeta_i,
/// built from
///   Z(t) = e^{beta(t) B} (Z0 - int_0^t e^{-beta(s) B} G(s) ds)
/// with trapezoidal quadrature on the path time grid.
struct TestProcessPair {
  std::string label;
  /// G(t_k), k = 0..K. G(t_k) may only depend on the path up to t_k.
  std::vector<ScalarField> g;
  ScalarField z0;
  /// Z(t_k), k = 0..K.
  std::vector<ScalarField> z;
};

/// Throws GridMismatch when g does not have one entry per path time.
TestProcessPair build_test_process(std::vector<ScalarField> g, ScalarField z0, const BrownianPath& path,
                                   const TransportSystem& sys, std::string label = {});

/// Energy functional used on both sides of the inequality.
enum class PhiMode {
  /// tv_phi, the lambda -> 0 limit.
  Tv,
  /// phi_lambda + lambda/2 |grad u|^2, the functional of the regularised flow.
  Yosida,
};

/// slack(t_k) = RHS - LHS of
///   1/2 |X - Z|^2 + int phi(X) <= 1/2 |x - Z(0)|^2 + int phi(Z) + int <G, X - Z>
/// with trapezoidal time integrals. Requires a physical trajectory stored at
/// every step. Throws GridMismatch on grid or time-grid mismatch.
std::vector<double> vi_slack(const Trajectory& traj_x, const TestProcessPair& pair, PhiMode mode = PhiMode::Tv);

/// Version tag of the fixed battery below; bump when any pair changes.
inline constexpr const char* kViBatteryVersion = "vi-battery-1";

/// The fixed five-pair battery: zero, constant G, transported bump,
/// realised-drift self-test and a smooth G with path-dependent coefficients.
std::vector<TestProcessPair> standard_vi_battery(const Trajectory& traj_x, const BrownianPath& path);

// ---------------------------------------------------------------------------

struct RhoOptions {
  int random_starts = 12;
  int iterations = 300;
  std::uint64_t seed = 20140501;
};

/// h^2 sum |grad y| / |y|_2; throws std::invalid_argument for y == 0.
double sobolev_quotient(const ScalarField& y);

/// Smallest quotient found by projected subgradient descent (nonnegative cone,
/// unit sphere) from disc and square indicators, smooth bumps and random
/// nonnegative fields. Any value found is attained by a grid function, so the
/// result bounds the best discrete constant from above.
double estimate_rho(const GridPtr& grid, const RhoOptions& opts = {});

/// 2 sqrt(pi), the continuum constant of the isoperimetric inequality.
double continuum_rho();

// ---------------------------------------------------------------------------

/// Smooth random datum with zero regions: uniform noise smoothed by the
/// resolvent (eps = (3h)^2), minus its mean, clamped at 0, scaled to max 1.
ScalarField random_nonnegative_field(const GridPtr& grid, std::uint64_t seed);

struct ContractionReport {
  double initial_gap = 0.0;
  double sup_gap = 0.0;
  /// max_k |X(t_k)| / |x| over both trajectories (norms of zero data excluded).
  double max_norm_ratio = 0.0;
  /// min over cells and stored steps of both trajectories.
  double min_value = 0.0;
  bool pass = false;
};

/// Evolves x and x_star on the same path and compares sup_t |X - X*| with |x - x*|.
ContractionReport contraction_check(const ScalarField& x, const ScalarField& x_star, const BrownianPath& path,
                                    const SolverConfig& cfg, double tol = 0.02);
ContractionReport contraction_check(const Trajectory& a, const Trajectory& b, double tol = 0.02);

// ---------------------------------------------------------------------------

/// Time series of one ensemble member at every step.
struct SampleSeries {
  std::uint64_t seed = 0;
  std::vector<double> l2_norm;
  std::vector<double> phi_lambda;
  std::vector<double> min_value;
  /// First step time with |X| <= threshold |x|; empty when censored.
  std::optional<double> tau;
  std::string error;
};

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_norm;
  /// 95% normal half-width of the mean norm.
  std::vector<double> ci_norm;
  std::vector<double> mean_phi;
  std::vector<double> mean_min;
  /// Fraction of samples with |X(t)| above the extinction threshold.
  std::vector<double> alive;
  /// mean |X(t)| + rho int_0^t alive(s) ds, trapezoidal.
  std::vector<double> la1_lhs;
  double x_norm = 0.0;
  double rho = 0.0;
  /// max_t la1_lhs / |x|.
  double la1_ratio = 0.0;
};

EnsembleStats ensemble_stats(const std::vector<SampleSeries>& samples, double dt, double x_norm, double rho);

struct ExtinctionOptions {
  double threshold = 1e-8;
  int workers = 1;
  /// Survival is reported on these times; empty selects 50 uniform points in (0, T].
  std::vector<double> t_grid;
};

struct ExtinctionReport {
  std::vector<SampleSeries> samples;
  double x_norm = 0.0;
  double rho_hat = 0.0;
  double horizon = 0.0;
  int censored = 0;
  int failed = 0;
  std::vector<double> t_grid;
  std::vector<double> survival;
  /// 95% Wilson interval of the survival estimate.
  std::vector<double> survival_lower;
  std::vector<double> survival_upper;
  /// min(1, |x| / (rho_hat t))
  std::vector<double> bound;
  /// Survival lower band <= bound wherever bound < 1.
  bool dominated = true;
  EnsembleStats stats;
};

/// Runs the rescaled scheme and the transformation for every seed (seed
/// list empty means the single path beta == 0). In equivariant frame mode the
/// rescaled trajectory does not depend on the path and is computed once.
ExtinctionReport extinction_study(const ScalarField& x0, const SolverConfig& cfg,
                                  const std::vector<std::uint64_t>& seeds, double rho_hat,
                                  const ExtinctionOptions& opts = {});

/// 95% Wilson score interval for k successes out of m.
std::pair<double, double> wilson_interval(int k, int m);

}  // namespace tvflow
