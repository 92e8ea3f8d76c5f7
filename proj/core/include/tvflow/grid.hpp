// SPDX-License-Identifier: Apache-2.0
//
// Cut-cell disc geometry on a uniform Cartesian grid and the discrete
// differential operators that act on it.
//
// A grid of resolution n covers [-R, R]^2 with n x n cells of size h = 2R/n.
// Storage carries one ghost layer on every side, so every field is an
// (n+2) x (n+2) row-major array addressed by i, j in [-1, n]. Scalar fields are
// zero outside the mask (Dirichlet extension by zero); vector fields live on
// every storage cell whose forward edges touch the mask, which is where the
// jumps to the zero extension are recorded.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace tvflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend double norm(Vec2 a) { return std::hypot(a.x, a.y); }
  friend bool operator==(Vec2, Vec2) = default;
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Disc domain {|xi| < R} resolved on an n x n cell grid.
class Grid {
 public:
  /// Throws std::invalid_argument unless R > 0 and n >= 8 is even.
  static GridPtr build(double radius, int n);

  double radius() const noexcept { return radius_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  int stride() const noexcept { return n_ + 2; }
  std::size_t storage_size() const noexcept { return static_cast<std::size_t>(stride()) * stride(); }

  /// Storage index of cell (i, j), i and j in [-1, n].
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j + 1) * stride() + static_cast<std::size_t>(i + 1);
  }
  int col(std::size_t idx) const noexcept { return static_cast<int>(idx % stride()) - 1; }
  int row(std::size_t idx) const noexcept { return static_cast<int>(idx / stride()) - 1; }

  /// Cell center of (i, j).
  Vec2 center(int i, int j) const noexcept {
    return {-radius_ + (i + 0.5) * h_, -radius_ + (j + 0.5) * h_};
  }
  Vec2 center(std::size_t idx) const noexcept { return center(col(idx), row(idx)); }

  bool in_mask(std::size_t idx) const noexcept { return unknown_[idx] >= 0; }
  bool in_mask(int i, int j) const noexcept { return in_mask(index(i, j)); }

  /// Position of a mask cell in the compact unknown numbering, -1 outside.
  int unknown(std::size_t idx) const noexcept { return unknown_[idx]; }

  /// Storage indices of mask cells in row-major order.
  std::span<const std::size_t> mask_cells() const noexcept { return mask_cells_; }
  std::size_t mask_count() const noexcept { return mask_cells_.size(); }
  double mask_area() const noexcept { return static_cast<double>(mask_count()) * h_ * h_; }

  bool operator==(const Grid& o) const noexcept { return radius_ == o.radius_ && n_ == o.n_; }

 private:
  Grid(double radius, int n);

  double radius_;
  int n_;
  double h_;
  std::vector<int> unknown_;
  std::vector<std::size_t> mask_cells_;
};

/// Grid function, zero outside the mask.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid);

  /// Samples f at mask cell centers.
  static ScalarField from_function(GridPtr grid, const std::function<double(Vec2)>& f);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  double& operator[](std::size_t idx) noexcept { return values_[idx]; }
  double operator[](std::size_t idx) const noexcept { return values_[idx]; }
  double& at(int i, int j) noexcept { return values_[grid_->index(i, j)]; }
  double at(int i, int j) const noexcept { return values_[grid_->index(i, j)]; }

  /// Re-imposes the zero extension.
  void apply_mask();

  double max_value() const;
  double min_value() const;
  double max_abs() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  /// this += s * o
  ScalarField& axpy(double s, const ScalarField& o);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Two components per storage cell.
class VectorField2 {
 public:
  explicit VectorField2(GridPtr grid);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  Vec2 operator[](std::size_t idx) const noexcept { return {x_[idx], y_[idx]}; }
  void set(std::size_t idx, Vec2 v) noexcept { x_[idx] = v.x; y_[idx] = v.y; }
  std::span<double> x() noexcept { return x_; }
  std::span<double> y() noexcept { return y_; }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }

 private:
  GridPtr grid_;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Throws GridMismatch unless both grids are equal.
void require_same_grid(const Grid& a, const Grid& b);

/// Forward differences of the zero-extended field.
VectorField2 gradient(const ScalarField& u);

/// Negative adjoint of gradient: <div p, u> = -<p, grad u> for every masked u.
ScalarField divergence(const VectorField2& p);

/// divergence(gradient(u)); the 5-point Dirichlet Laplacian on the mask.
ScalarField laplacian(const ScalarField& u);

/// h^2-weighted L2 products.
double inner(const ScalarField& u, const ScalarField& v);
double inner(const VectorField2& p, const VectorField2& q);
double l2_norm(const ScalarField& u);
double l2_norm(const VectorField2& p);

struct ResolventOptions {
  double rel_tol = 1e-10;
  /// 0 selects 10 * mask_count().
  int max_iterations = 0;
};

/// v solving (I - eps * laplacian) v = u by conjugate gradients.
/// Throws ConvergenceError carrying the residual history when the cap is hit.
ScalarField resolvent(const ScalarField& u, double eps, const ResolventOptions& opts = {});

}  // namespace tvflow
