// SPDX-License-Identifier: Apache-2.0
//
// Yosida approximation of the multivalued sign graph on R^2, its Moreau
// envelope, and the discrete total-variation functionals built on them.
#pragma once

#include "tvflow/grid.hpp"

namespace tvflow {

/// Regularisation parameter lambda in (0, 1].
class YosidaParams {
 public:
  explicit YosidaParams(double lambda);
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// u / lambda on |u| <= lambda, u / |u| beyond.
Vec2 psi_lambda(Vec2 u, double lambda);

/// psi_lambda(u) + lambda u.
Vec2 psi_tilde(Vec2 u, double lambda);

/// Scalar mobility k with psi_tilde(u) = k u: 1 / max(|u|, lambda) + lambda.
inline double psi_tilde_mobility(double abs_u, double lambda) {
  return 1.0 / (abs_u > lambda ? abs_u : lambda) + lambda;
}

/// Moreau envelope inf_v |u - v|^2 / (2 lambda) + |v|, closed form.
double moreau_j(Vec2 u, double lambda);

/// Discrete isotropic total variation h^2 sum |grad u|, jumps to the zero
/// extension included.
double tv_phi(const ScalarField& u);

/// h^2 sum j_lambda(grad u).
double phi_lambda(const ScalarField& u, double lambda);

/// Sharp bound on |phi_lambda(u) - tv_phi(u)|: lambda/2 times the area of the
/// cells carrying a gradient of a masked field (the disc plus its rim edges).
double phi_gap_bound(const Grid& grid, double lambda);

/// div psi_tilde(grad u).
ScalarField div_psi_tilde(const ScalarField& u, double lambda);

/// h^2 sum psi_tilde(grad u) . grad u, the dissipation rate of the L2 norm.
double dissipation(const ScalarField& u, double lambda);

}  // namespace tvflow
