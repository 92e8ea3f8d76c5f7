// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tvflow {

/// Discrete N-dimensional Brownian motion on the uniform grid t_k = k dt, k = 0..K.
///
/// Increments come from one std::mt19937_64 stream per component, seeded by
/// splitmix64 of (seed, component); normals are drawn by Box-Muller. Both are
/// specified bit for bit, so a path is a pure function of (seed, N, T, dt).
class BrownianPath {
 public:
  /// Throws std::invalid_argument when T/dt is not an integer or N < 1.
  static BrownianPath sample(std::uint64_t seed, int dims, double horizon, double dt);

  /// beta == 0, the deterministic baseline.
  static BrownianPath zero(int dims, double horizon, double dt);

  /// Brownian-bridge refinement to dt / factor. Coarse values are kept exactly.
  /// Powers of two are applied as repeated halvings, so refine(2).refine(2) == refine(4).
  BrownianPath refine(int factor) const;

  /// CSV with header t,beta_1..beta_N and full round-trip precision.
  void write_csv(std::ostream& os) const;
  static BrownianPath read_csv(std::istream& is, std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  int dims() const noexcept { return dims_; }
  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  double horizon() const noexcept { return dt_ * steps_; }
  double time(int k) const noexcept { return k * dt_; }
  bool is_zero() const noexcept { return zero_; }

  double value(int component, int k) const { return values_[static_cast<std::size_t>(k) * dims_ + component]; }
  /// beta(t_k), one entry per component.
  std::span<const double> at(int k) const {
    return {values_.data() + static_cast<std::size_t>(k) * dims_, static_cast<std::size_t>(dims_)};
  }

  friend bool operator==(const BrownianPath& a, const BrownianPath& b) {
    return a.dims_ == b.dims_ && a.steps_ == b.steps_ && a.dt_ == b.dt_ && a.values_ == b.values_;
  }

 private:
  BrownianPath(std::uint64_t seed, int dims, int steps, double dt);
  BrownianPath refine_sequential(int factor) const;

  std::uint64_t seed_ = 0;
  int dims_ = 0;
  int steps_ = 0;
  double dt_ = 0.0;
  bool zero_ = false;
  std::vector<double> values_;
};

/// Number of steps K with K * dt == horizon; throws std::invalid_argument otherwise.
int checked_step_count(double horizon, double dt);

/// splitmix64 finaliser, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace tvflow
