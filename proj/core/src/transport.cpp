// SPDX-License-Identifier: Apache-2.0
#include "tvflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvflow {

Mat2 matrix_exp(const Mat2& m) {
  const double mu = 0.5 * (m.a + m.d);
  const Mat2 a{m.a - mu, m.b, m.c, m.d - mu};
  // A traceless => A^2 = q I.
  const double q = a.a * a.a + a.b * a.c;
  double c0 = 1.0;
  double c1 = 1.0;
  if (q > 0.0) {
    const double r = std::sqrt(q);
    c0 = std::cosh(r);
    c1 = std::sinh(r) / r;
  } else if (q < 0.0) {
    const double r = std::sqrt(-q);
    c0 = std::cos(r);
    c1 = std::sin(r) / r;
  }
  const double e = std::exp(mu);
  return {e * (c0 + c1 * a.a), e * c1 * a.b, e * c1 * a.c, e * (c0 + c1 * a.d)};
}

namespace {

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c, s, -s, c};
}

}  // namespace

TransportFieldSpec::TransportFieldSpec(double omega, std::string label) : omega_(omega), label_(std::move(label)) {
  if (!std::isfinite(omega)) throw std::invalid_argument("transport field strength must be finite");
}

TransportFieldSpec TransportFieldSpec::from_matrix(const Mat2& m, std::string label) {
  if (m.a != 0.0 || m.d != 0.0 || m.b != -m.c) {
    throw std::invalid_argument("transport generator must be skew-symmetric");
  }
  return TransportFieldSpec(m.b, std::move(label));
}

TransportSystem::TransportSystem(std::vector<TransportFieldSpec> fields) : fields_(std::move(fields)) {}

TransportSystem TransportSystem::from_omegas(std::span<const double> omegas) {
  std::vector<TransportFieldSpec> f;
  f.reserve(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) f.emplace_back(omegas[i], "b" + std::to_string(i + 1));
  return TransportSystem(std::move(f));
}

bool TransportSystem::pairwise_commuting() const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    for (std::size_t j = i + 1; j < fields_.size(); ++j) {
      const Mat2 a = fields_[i].matrix();
      const Mat2 b = fields_[j].matrix();
      if (!(a * b == b * a)) return false;
    }
  }
  return true;
}

Mat2 TransportSystem::composite(std::span<const double> s) const {
  if (s.size() != fields_.size()) {
    throw std::invalid_argument("expected " + std::to_string(fields_.size()) + " group parameters, got " +
                                std::to_string(s.size()));
  }
  // All generators are multiples of J, so the product is a single rotation.
  double angle = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) angle += fields_[i].omega() * s[i];
  return rotation(angle);
}

Vec2 flow_map(const TransportFieldSpec& spec, double s, Vec2 xi) { return rotation(spec.omega() * s) * xi; }

double sample_bilinear(const ScalarField& u, Vec2 xi) {
  const Grid& g = u.grid();
  const double h = g.h();
  double fx = (xi.x + g.radius()) / h - 0.5;
  double fy = (xi.y + g.radius()) / h - 0.5;
  // Points that land on a cell center up to rounding are snapped onto it.
  constexpr double snap = 1e-10;
  if (std::abs(fx - std::round(fx)) < snap) fx = std::round(fx);
  if (std::abs(fy - std::round(fy)) < snap) fy = std::round(fy);
  const double i0f = std::floor(fx);
  const double j0f = std::floor(fy);
  const int n = g.n();
  if (i0f < -1.0 || j0f < -1.0 || i0f > n || j0f > n) return 0.0;
  const int i0 = static_cast<int>(i0f);
  const int j0 = static_cast<int>(j0f);
  const double ax = fx - i0f;
  const double ay = fy - j0f;
  auto value = [&](int i, int j) { return (i > n || j > n) ? 0.0 : u.at(i, j); };
  const double v00 = value(i0, j0);
  const double v10 = ax > 0.0 ? value(i0 + 1, j0) : 0.0;
  const double v01 = ay > 0.0 ? value(i0, j0 + 1) : 0.0;
  const double v11 = (ax > 0.0 && ay > 0.0) ? value(i0 + 1, j0 + 1) : 0.0;
  return (1.0 - ax) * (1.0 - ay) * v00 + ax * (1.0 - ay) * v10 + (1.0 - ax) * ay * v01 + ax * ay * v11;
}

ScalarField apply_linear_map(const ScalarField& u, const Mat2& m) {
  if (m == Mat2{}) return u;
  const Grid& g = u.grid();
  ScalarField out(u.grid_ptr());
  for (auto c : g.mask_cells()) out[c] = sample_bilinear(u, m * g.center(c));
  return out;
}

ScalarField group_apply(const ScalarField& u, const TransportFieldSpec& spec, double s) {
  if (s == 0.0) return u;
  return apply_linear_map(u, rotation(spec.omega() * s));
}

ScalarField group_apply_multi(const ScalarField& u, const TransportSystem& sys, std::span<const double> s) {
  const Mat2 m = sys.composite(s);
  return apply_linear_map(u, m);
}

ScalarField b_operator(const ScalarField& u, const TransportFieldSpec& spec) {
  const Grid& g = u.grid();
  const VectorField2 grad = gradient(u);
  VectorField2 flux(u.grid_ptr());
  ScalarField advect(u.grid_ptr());
  for (auto c : g.mask_cells()) {
    const Vec2 b = spec.field(g.center(c));
    advect[c] = dot(b, grad[c]);
    flux.set(c, u[c] * b);
  }
  ScalarField out = divergence(flux);
  out += advect;
  out *= 0.5;
  return out;
}

ScalarField b_squared(const ScalarField& u, const TransportFieldSpec& spec) {
  return b_operator(b_operator(u, spec), spec);
}

CommutationReport check_commutation_with_laplacian(const Mat2& generator, double s, double eps,
                                                   std::span<const ScalarField> trials) {
  const Mat2 m = matrix_exp(Mat2{s * generator.a, s * generator.b, s * generator.c, s * generator.d});
  CommutationReport report;
  for (const auto& u : trials) {
    const double norm_u = l2_norm(u);
    if (norm_u == 0.0) {
      report.per_trial.push_back(0.0);
      continue;
    }
    const ScalarField lhs = resolvent(apply_linear_map(u, m), eps);
    const ScalarField rhs = apply_linear_map(resolvent(u, eps), m);
    const double r = l2_norm(lhs - rhs) / norm_u;
    report.per_trial.push_back(r);
    report.max_relative_residual = std::max(report.max_relative_residual, r);
  }
  return report;
}

CommutationReport check_commutation_with_laplacian(const TransportFieldSpec& spec, double s, double eps,
                                                   std::span<const ScalarField> trials) {
  return check_commutation_with_laplacian(spec.matrix(), s, eps, trials);
}

}  // namespace tvflow
