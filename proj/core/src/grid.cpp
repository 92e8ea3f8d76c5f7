// SPDX-License-Identifier: Apache-2.0
#include "tvflow/grid.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "tvflow/error.hpp"

namespace tvflow {

namespace {

bool four_connected(const Grid& g) {
  const auto cells = g.mask_cells();
  std::vector<char> seen(g.storage_size(), 0);
  std::queue<std::size_t> todo;
  todo.push(cells.front());
  seen[cells.front()] = 1;
  std::size_t visited = 0;
  const std::ptrdiff_t s = g.stride();
  const std::ptrdiff_t steps[] = {1, -1, s, -s};
  while (!todo.empty()) {
    const auto c = todo.front();
    todo.pop();
    ++visited;
    for (auto d : steps) {
      const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + d);
      if (g.in_mask(nb) && !seen[nb]) {
        seen[nb] = 1;
        todo.push(nb);
      }
    }
  }
  return visited == cells.size();
}

}  // namespace

Grid::Grid(double radius, int n)
    : radius_(radius), n_(n), h_(2.0 * radius / n), unknown_(storage_size(), -1) {
  int next = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // Integer form of |center|^2 < R^2, so the mask does not depend on R.
      const long long a = 2LL * i + 1 - n;
      const long long b = 2LL * j + 1 - n;
      if (a * a + b * b < static_cast<long long>(n) * n) {
        const auto idx = index(i, j);
        unknown_[idx] = next++;
        mask_cells_.push_back(idx);
      }
    }
  }
}

GridPtr Grid::build(double radius, int n) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("grid radius must be positive, got " + std::to_string(radius));
  }
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid resolution must be even and >= 8, got " + std::to_string(n));
  }
  auto g = std::shared_ptr<Grid>(new Grid(radius, n));
  if (g->mask_cells_.empty() || !four_connected(*g)) {
    throw std::invalid_argument("degenerate disc mask");
  }
  return g;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw GridMismatch("fields live on different grids (n=" + std::to_string(a.n()) + " vs n=" +
                       std::to_string(b.n()) + ")");
  }
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->storage_size(), 0.0) {}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(Vec2)>& f) {
  ScalarField u(std::move(grid));
  for (auto idx : u.grid().mask_cells()) u.values_[idx] = f(u.grid().center(idx));
  return u;
}

void ScalarField::apply_mask() {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!grid_->in_mask(k)) values_[k] = 0.0;
  }
}

double ScalarField::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (auto idx : grid_->mask_cells()) m = std::max(m, values_[idx]);
  return m;
}

double ScalarField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (auto idx : grid_->mask_cells()) m = std::min(m, values_[idx]);
  return m;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) { return axpy(1.0, o); }
ScalarField& ScalarField::operator-=(const ScalarField& o) { return axpy(-1.0, o); }

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
  require_same_grid(*grid_, o.grid());
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
  return *this;
}

VectorField2::VectorField2(GridPtr grid)
    : grid_(std::move(grid)), x_(grid_->storage_size(), 0.0), y_(grid_->storage_size(), 0.0) {}

// ---------------------------------------------------------------------------
// Operators

VectorField2 gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  VectorField2 p(u.grid_ptr());
  const auto in = u.data();
  auto px = p.x();
  auto py = p.y();
  const double inv_h = 1.0 / g.h();
  const int n = g.n();
  for (int j = -1; j <= n; ++j) {
    for (int i = -1; i <= n; ++i) {
      const auto c = g.index(i, j);
      if (i < n) px[c] = (in[g.index(i + 1, j)] - in[c]) * inv_h;
      if (j < n) py[c] = (in[g.index(i, j + 1)] - in[c]) * inv_h;
    }
  }
  return p;
}

ScalarField divergence(const VectorField2& p) {
  const Grid& g = p.grid();
  ScalarField out(p.grid_ptr());
  const auto px = p.x();
  const auto py = p.y();
  const double inv_h = 1.0 / g.h();
  const std::size_t s = static_cast<std::size_t>(g.stride());
  for (auto c : g.mask_cells()) {
    out[c] = (px[c] - px[c - 1] + py[c] - py[c - s]) * inv_h;
  }
  return out;
}

ScalarField laplacian(const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField out(u.grid_ptr());
  const auto in = u.data();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const std::size_t s = static_cast<std::size_t>(g.stride());
  for (auto c : g.mask_cells()) {
    out[c] = (in[c + 1] + in[c - 1] + in[c + s] + in[c - s] - 4.0 * in[c]) * inv_h2;
  }
  return out;
}

double inner(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid(), v.grid());
  const auto a = u.data();
  const auto b = v.data();
  double sum = 0.0;
  for (auto c : u.grid().mask_cells()) sum += a[c] * b[c];
  return sum * u.grid().h() * u.grid().h();
}

double inner(const VectorField2& p, const VectorField2& q) {
  require_same_grid(p.grid(), q.grid());
  double sum = 0.0;
  const auto px = p.x(), py = p.y(), qx = q.x(), qy = q.y();
  for (std::size_t k = 0; k < px.size(); ++k) sum += px[k] * qx[k] + py[k] * qy[k];
  return sum * p.grid().h() * p.grid().h();
}

double l2_norm(const ScalarField& u) { return std::sqrt(inner(u, u)); }
double l2_norm(const VectorField2& p) { return std::sqrt(inner(p, p)); }

ScalarField resolvent(const ScalarField& u, double eps, const ResolventOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("resolvent parameter must be positive");
  const Grid& g = u.grid();
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * g.mask_count());

  auto apply = [&](const ScalarField& v) {
    ScalarField av = laplacian(v);
    av *= -eps;
    av += v;
    return av;
  };

  ScalarField x(u.grid_ptr());
  const double rhs_norm = l2_norm(u);
  if (rhs_norm == 0.0) return x;

  ScalarField r = u;
  ScalarField d = r;
  double rr = inner(r, r);
  std::vector<double> history;
  for (int it = 0; it < cap; ++it) {
    const ScalarField ad = apply(d);
    const double alpha = rr / inner(d, ad);
    x.axpy(alpha, d);
    r.axpy(-alpha, ad);
    const double rr_new = inner(r, r);
    history.push_back(std::sqrt(rr_new) / rhs_norm);
    if (history.back() <= opts.rel_tol) return x;
    d *= rr_new / rr;
    d += r;
    rr = rr_new;
  }
  std::string what = "resolvent CG did not reach tolerance within " + std::to_string(cap) +
                     " iterations (final relative residual " + std::to_string(history.back()) + ")";
  throw ConvergenceError(what, std::move(history));
}

}  // namespace tvflow
