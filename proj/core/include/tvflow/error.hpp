// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tvflow {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields (or a field and a trajectory) live on different grids or time grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative solve stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}

  /// Residual after each iteration, last entry is the final one.
  const std::vector<double>& residuals() const noexcept { return residuals_; }
  double final_residual() const noexcept { return residuals_.empty() ? 0.0 : residuals_.back(); }

 private:
  std::vector<double> residuals_;
};

/// Malformed configuration, CSV, manifest or image input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvflow
