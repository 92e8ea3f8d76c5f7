// SPDX-License-Identifier: Apache-2.0
#include "tvflow/regularization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvflow {

YosidaParams::YosidaParams(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
}

Vec2 psi_lambda(Vec2 u, double lambda) {
  const double r = norm(u);
  return r <= lambda ? u * (1.0 / lambda) : u * (1.0 / r);
}

Vec2 psi_tilde(Vec2 u, double lambda) { return psi_lambda(u, lambda) + lambda * u; }

double moreau_j(Vec2 u, double lambda) {
  const double r = norm(u);
  if (r <= lambda) return r * r / (2.0 * lambda);
  // r - j is exact here (Sterbenz); round j up when nearest rounding overshoots.
  const double j = r - 0.5 * lambda;
  return r - j > 0.5 * lambda ? std::nextafter(j, r) : j;
}

double tv_phi(const ScalarField& u) {
  const VectorField2 g = gradient(u);
  const auto gx = g.x();
  const auto gy = g.y();
  double sum = 0.0;
  for (std::size_t k = 0; k < gx.size(); ++k) sum += std::hypot(gx[k], gy[k]);
  const double h = u.grid().h();
  return sum * h * h;
}

double phi_lambda(const ScalarField& u, double lambda) {
  const VectorField2 g = gradient(u);
  const auto gx = g.x();
  const auto gy = g.y();
  double sum = 0.0;
  for (std::size_t k = 0; k < gx.size(); ++k) sum += moreau_j({gx[k], gy[k]}, lambda);
  const double h = u.grid().h();
  return sum * h * h;
}

double phi_gap_bound(const Grid& grid, double lambda) {
  const std::size_t s = static_cast<std::size_t>(grid.stride());
  std::size_t count = 0;
  for (std::size_t c = 0; c + s < grid.storage_size(); ++c) {
    if (grid.in_mask(c) || grid.in_mask(c + 1) || grid.in_mask(c + s)) ++count;
  }
  return 0.5 * lambda * static_cast<double>(count) * grid.h() * grid.h();
}

ScalarField div_psi_tilde(const ScalarField& u, double lambda) {
  VectorField2 g = gradient(u);
  auto gx = g.x();
  auto gy = g.y();
  for (std::size_t k = 0; k < gx.size(); ++k) {
    const double m = psi_tilde_mobility(std::hypot(gx[k], gy[k]), lambda);
    gx[k] *= m;
    gy[k] *= m;
  }
  return divergence(g);
}

double dissipation(const ScalarField& u, double lambda) {
  const VectorField2 g = gradient(u);
  const auto gx = g.x();
  const auto gy = g.y();
  double sum = 0.0;
  for (std::size_t k = 0; k < gx.size(); ++k) {
    const double r2 = gx[k] * gx[k] + gy[k] * gy[k];
    sum += psi_tilde_mobility(std::sqrt(r2), lambda) * r2;
  }
  const double h = u.grid().h();
  return sum * h * h;
}

}  // namespace tvflow
