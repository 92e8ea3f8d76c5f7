// SPDX-License-Identifier: Apache-2.0
//
// Divergence-free rotation fields b(xi) = Lambda xi, Lambda = omega * [[0, 1], [-1, 0]],
// their transport operators B = b . grad and the groups exp(sB) acting on grid
// fields by semi-Lagrangian bilinear interpolation.
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow {

/// Row-major 2x2 matrix.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  Vec2 operator*(Vec2 v) const noexcept { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& o) const noexcept {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 transposed() const noexcept { return {a, c, b, d}; }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// exp(M) for an arbitrary real 2x2 matrix, closed form.
Mat2 matrix_exp(const Mat2& m);

/// A skew-symmetric generator Lambda = omega * J with J = [[0, 1], [-1, 0]].
class TransportFieldSpec {
 public:
  explicit TransportFieldSpec(double omega, std::string label = {});
  /// Throws std::invalid_argument unless m is exactly skew-symmetric.
  static TransportFieldSpec from_matrix(const Mat2& m, std::string label = {});

  double omega() const noexcept { return omega_; }
  const std::string& label() const noexcept { return label_; }
  Mat2 matrix() const noexcept { return {0.0, omega_, -omega_, 0.0}; }
  Vec2 field(Vec2 xi) const noexcept { return matrix() * xi; }

 private:
  double omega_;
  std::string label_;
};

/// Ordered list of commuting rotation fields b_1..b_N.
class TransportSystem {
 public:
  TransportSystem() = default;
  explicit TransportSystem(std::vector<TransportFieldSpec> fields);
  static TransportSystem from_omegas(std::span<const double> omegas);

  std::size_t size() const noexcept { return fields_.size(); }
  bool empty() const noexcept { return fields_.empty(); }
  const TransportFieldSpec& operator[](std::size_t i) const { return fields_.at(i); }
  const std::vector<TransportFieldSpec>& fields() const noexcept { return fields_; }

  /// Lambda_i Lambda_j == Lambda_j Lambda_i for every pair, checked exactly.
  bool pairwise_commuting() const;

  /// Composite map exp(s_1 Lambda_1) ... exp(s_N Lambda_N).
  Mat2 composite(std::span<const double> s) const;

 private:
  std::vector<TransportFieldSpec> fields_;
};

/// exp(s Lambda) xi by the closed-form rotation.
Vec2 flow_map(const TransportFieldSpec& spec, double s, Vec2 xi);

/// Bilinear interpolation of the zero-extended field at an arbitrary point.
double sample_bilinear(const ScalarField& u, Vec2 xi);

/// out(xi) = u(M xi) on mask cells. Positivity preserving.
ScalarField apply_linear_map(const ScalarField& u, const Mat2& m);

/// (exp(sB) u)(xi) = u(zeta(s, xi)).
ScalarField group_apply(const ScalarField& u, const TransportFieldSpec& spec, double s);

/// One interpolation through the composed map; throws std::invalid_argument on size mismatch.
ScalarField group_apply_multi(const ScalarField& u, const TransportSystem& sys, std::span<const double> s);

/// Skew-adjoint discretisation B u = (b . grad u + div(b u)) / 2.
ScalarField b_operator(const ScalarField& u, const TransportFieldSpec& spec);

/// B(B u); satisfies <u, B^2 u> = -|B u|^2 to rounding.
ScalarField b_squared(const ScalarField& u, const TransportFieldSpec& spec);

struct CommutationReport {
  /// max over trials of |J(e^{sB}u) - e^{sB}(J u)| / |u|
  double max_relative_residual = 0.0;
  std::vector<double> per_trial;
};

/// Residual of the resolvent/group commutation for the map exp(s M).
/// M need not be skew, which gives the negative control.
CommutationReport check_commutation_with_laplacian(const Mat2& generator, double s, double eps,
                                                   std::span<const ScalarField> trials);

/// Same with a proper rotation field.
CommutationReport check_commutation_with_laplacian(const TransportFieldSpec& spec, double s, double eps,
                                                   std::span<const ScalarField> trials);

}  // namespace tvflow
