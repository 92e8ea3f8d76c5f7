// SPDX-License-Identifier: Apache-2.0
#include "tvflow/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tvflow/error.hpp"

namespace tvflow {

namespace {

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  // (0, 1] with 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int checked_step_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw std::invalid_argument("horizon and dt must be positive");
  const double ratio = horizon / dt;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "T/dt must be an integer (T=" << horizon << ", dt=" << dt << ")";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(k);
}

BrownianPath::BrownianPath(std::uint64_t seed, int dims, int steps, double dt)
    : seed_(seed), dims_(dims), steps_(steps), dt_(dt),
      values_(static_cast<std::size_t>(steps + 1) * dims, 0.0) {}

BrownianPath BrownianPath::sample(std::uint64_t seed, int dims, double horizon, double dt) {
  if (dims < 1) throw std::invalid_argument("Brownian path needs at least one component");
  const int steps = checked_step_count(horizon, dt);
  BrownianPath p(seed, dims, steps, dt);
  const double sd = std::sqrt(dt);
  for (int i = 0; i < dims; ++i) {
    NormalStream rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    double w = 0.0;
    for (int k = 1; k <= steps; ++k) {
      w += sd * rng.next();
      p.values_[static_cast<std::size_t>(k) * dims + i] = w;
    }
  }
  return p;
}

BrownianPath BrownianPath::zero(int dims, double horizon, double dt) {
  if (dims < 0) throw std::invalid_argument("negative dimension");
  BrownianPath p(0, dims, checked_step_count(horizon, dt), dt);
  p.zero_ = true;
  return p;
}

BrownianPath BrownianPath::refine(int factor) const {
  if (factor < 2) throw std::invalid_argument("refinement factor must be >= 2");
  BrownianPath out = *this;
  int rest = factor;
  while (rest % 2 == 0) {
    out = out.refine_sequential(2);
    rest /= 2;
  }
  if (rest > 1) out = out.refine_sequential(rest);
  return out;
}

BrownianPath BrownianPath::refine_sequential(int factor) const {
  const int fine_steps = steps_ * factor;
  BrownianPath out(seed_, dims_, fine_steps, dt_ / factor);
  out.zero_ = zero_;
  const double dt_fine = out.dt_;
  for (int i = 0; i < dims_; ++i) {
    NormalStream rng(mix_seed(mix_seed(seed_, 0xb41d6eULL + static_cast<std::uint64_t>(fine_steps)),
                              static_cast<std::uint64_t>(i)));
    for (int k = 0; k < steps_; ++k) {
      const double a = value(i, k);
      const double b = value(i, k + 1);
      out.values_[static_cast<std::size_t>(k) * factor * dims_ + i] = a;
      double prev = a;
      for (int j = 1; j < factor; ++j) {
        // Bridge from (t_{j-1}, prev) to (t_end, b).
        const double remaining = (factor - j + 1) * dt_fine;
        const double mean = prev + (b - prev) * dt_fine / remaining;
        const double var = dt_fine * (remaining - dt_fine) / remaining;
        const double z = zero_ ? 0.0 : rng.next();
        prev = mean + std::sqrt(var) * z;
        out.values_[(static_cast<std::size_t>(k) * factor + j) * dims_ + i] = prev;
      }
    }
    out.values_[static_cast<std::size_t>(fine_steps) * dims_ + i] = value(i, steps_);
  }
  return out;
}

void BrownianPath::write_csv(std::ostream& os) const {
  os << "t";
  for (int i = 0; i < dims_; ++i) os << ",beta_" << (i + 1);
  os << "\r\n";
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k <= steps_; ++k) {
    os << time(k);
    for (int i = 0; i < dims_; ++i) os << ',' << value(i, k);
    os << "\r\n";
  }
  os.precision(old_precision);
}

BrownianPath BrownianPath::read_csv(std::istream& is, std::uint64_t seed) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty Brownian path CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int dims = 0;
  {
    std::istringstream hs(line);
    std::string cell;
    std::getline(hs, cell, ',');
    if (cell != "t") throw FormatError("Brownian path CSV must start with column t");
    while (std::getline(hs, cell, ',')) {
      if (cell != "beta_" + std::to_string(dims + 1)) throw FormatError("unexpected column '" + cell + "'");
      ++dims;
    }
  }
  if (dims < 1) throw FormatError("Brownian path CSV has no beta columns");
  std::vector<double> times;
  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) {
        throw FormatError("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      (col == 0 ? times : vals).push_back(v);
      ++col;
    }
    if (col != dims + 1) throw FormatError("line " + std::to_string(lineno) + ": wrong column count");
  }
  if (times.size() < 2) throw FormatError("Brownian path CSV needs at least two rows");
  const int steps = static_cast<int>(times.size()) - 1;
  const double dt = times.back() / steps;
  for (int k = 0; k <= steps; ++k) {
    if (std::abs(times[k] - k * dt) > 1e-9 * std::max(1.0, times.back())) {
      throw FormatError("Brownian path CSV times are not uniform");
    }
  }
  BrownianPath p(seed, dims, steps, dt);
  p.values_ = std::move(vals);
  for (int i = 0; i < dims; ++i) {
    if (p.value(i, 0) != 0.0) throw FormatError("Brownian path must start at 0");
  }
  bool all_zero = true;
  for (double v : p.values_) all_zero = all_zero && v == 0.0;
  p.zero_ = all_zero;
  return p;
}

}  // namespace tvflow
