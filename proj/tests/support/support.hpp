// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow::testing {

inline ScalarField random_field(const GridPtr& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField u(g);
  for (auto c : g->mask_cells()) u[c] = d(rng);
  return u;
}

/// Random values on every cell where the gradient of a masked field can be nonzero.
inline VectorField2 random_flux(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorField2 p(g);
  const std::size_t s = static_cast<std::size_t>(g->stride());
  for (auto c : g->mask_cells()) {
    for (std::size_t q : {c, c - 1, c - s}) p.set(q, {d(rng), d(rng)});
  }
  return p;
}

/// Dense forward-difference matrix: rows are (x, y) components on every
/// storage cell, columns are mask unknowns. Zero extension outside the disc.
struct DenseGradient {
  Eigen::MatrixXd g;
  std::vector<std::size_t> cells;
  std::size_t storage = 0;

  explicit DenseGradient(const Grid& grid) : storage(grid.storage_size()) {
    const int n = grid.n();
    for (auto c : grid.mask_cells()) cells.push_back(c);
    g = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(storage), static_cast<Eigen::Index>(cells.size()));
    auto col = [&](int i, int j) -> Eigen::Index {
      if (i < 0 || j < 0 || i >= n || j >= n || !grid.in_mask(i, j)) return -1;
      return grid.unknown(grid.index(i, j));
    };
    const double ih = 1.0 / grid.h();
    for (int j = -1; j <= n; ++j) {
      for (int i = -1; i <= n; ++i) {
        const auto row = static_cast<Eigen::Index>(grid.index(i, j));
        const Eigen::Index here = col(i, j);
        if (i < n) {
          if (const Eigen::Index e = col(i + 1, j); e >= 0) g(row, e) += ih;
          if (here >= 0) g(row, here) -= ih;
        }
        if (j < n) {
          const Eigen::Index ry = row + static_cast<Eigen::Index>(storage);
          if (const Eigen::Index e = col(i, j + 1); e >= 0) g(ry, e) += ih;
          if (here >= 0) g(ry, here) -= ih;
        }
      }
    }
  }

  Eigen::VectorXd pack(const ScalarField& u) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t k = 0; k < cells.size(); ++k) v[static_cast<Eigen::Index>(k)] = u[cells[k]];
    return v;
  }
  ScalarField unpack(const GridPtr& grid, const Eigen::VectorXd& v) const {
    ScalarField u(grid);
    for (std::size_t k = 0; k < cells.size(); ++k) u[cells[k]] = v[static_cast<Eigen::Index>(k)];
    return u;
  }
  Eigen::VectorXd pack(const VectorField2& p) const {
    Eigen::VectorXd v(2 * static_cast<Eigen::Index>(storage));
    for (std::size_t k = 0; k < storage; ++k) {
      v[static_cast<Eigen::Index>(k)] = p.x()[k];
      v[static_cast<Eigen::Index>(k + storage)] = p.y()[k];
    }
    return v;
  }
};

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

/// Max |grad u| over the mask by central differences of a smooth closure.
template <class F>
double max_gradient(const Grid& g, F f) {
  double m = 0.0;
  const double e = 1e-6;
  for (auto c : g.mask_cells()) {
    const Vec2 p = g.center(c);
    const double gx = (f(p + Vec2{e, 0}) - f(p - Vec2{e, 0})) / (2 * e);
    const double gy = (f(p + Vec2{0, e}) - f(p - Vec2{0, e})) / (2 * e);
    m = std::max(m, std::hypot(gx, gy));
  }
  return m;
}

}  // namespace tvflow::testing
