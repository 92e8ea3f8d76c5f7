// SPDX-License-Identifier: Apache-2.0
#include "tvflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tvflow/error.hpp"
#include "tvflow/io.hpp"
#include "tvflow/pgm.hpp"

namespace tvflow {

namespace {

constexpr std::pair<Study, const char*> kStudies[] = {
    {Study::Single, "single"},           {Study::Ensemble, "ensemble"},
    {Study::LambdaSweep, "lambda-sweep"}, {Study::Extinction, "extinction"},
    {Study::ViCheck, "vi-check"},         {Study::Contraction, "contraction"},
    {Study::UnitProperties, "unit-properties"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::string source;
  int line;
  std::string key;
  std::string value;

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source + ":" + std::to_string(line) + ": " + key + ": " + what);
  }

  double number() const {
    double v = 0.0;
    const char* b = value.data();
    const char* e = b + value.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e || !std::isfinite(v)) fail("expected a number, got '" + value + "'");
    return v;
  }

  long long integer() const {
    long long v = 0;
    const char* b = value.data();
    const char* e = b + value.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) fail("expected an integer, got '" + value + "'");
    return v;
  }

  bool boolean() const {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail("expected true or false, got '" + value + "'");
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    if (value.empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Field f{source, line, key, trim(item)};
      out.push_back(f.number());
    }
    return out;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
};

}  // namespace

std::string to_string(Study s) {
  for (const auto& [k, name] : kStudies) {
    if (k == s) return name;
  }
  return "single";
}

Study study_from_string(const std::string& s) {
  for (const auto& [k, name] : kStudies) {
    if (s == name) return k;
  }
  throw std::invalid_argument("unknown study '" + s + "'");
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  RunConfig rc;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  const std::map<std::string, std::function<void(const Field&)>> handlers = {
      {"study", [&](const Field& f) {
         try {
           rc.study = study_from_string(f.value);
         } catch (const std::invalid_argument& e) {
           f.fail(e.what());
         }
       }},
      {"grid.radius", [&](const Field& f) { rc.radius = f.positive(); }},
      {"grid.n", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 8 || v % 2 != 0 || v > 4096) f.fail("must be an even integer in [8, 4096]");
         rc.n = static_cast<int>(v);
       }},
      {"transport.omegas", [&](const Field& f) { rc.omegas = f.numbers(); }},
      {"lambda", [&](const Field& f) {
         rc.lambda = f.number();
         if (!(rc.lambda > 0.0 && rc.lambda <= 1.0)) f.fail("must lie in (0, 1]");
       }},
      {"lambdas", [&](const Field& f) {
         rc.lambdas = f.numbers();
         for (std::size_t i = 0; i < rc.lambdas.size(); ++i) {
           if (!(rc.lambdas[i] > 0.0 && rc.lambdas[i] <= 1.0)) f.fail("every lambda must lie in (0, 1]");
           if (i > 0 && !(rc.lambdas[i] < rc.lambdas[i - 1])) f.fail("lambdas must be strictly decreasing");
         }
       }},
      {"dt", [&](const Field& f) { rc.dt = f.positive(); }},
      {"horizon", [&](const Field& f) {
         if (f.value == "auto") {
           rc.horizon.reset();
         } else {
           rc.horizon = f.positive();
         }
       }},
      {"scheme", [&](const Field& f) {
         try {
           rc.scheme = scheme_from_string(f.value);
         } catch (const std::invalid_argument& e) {
           f.fail(e.what());
         }
       }},
      {"frame", [&](const Field& f) {
         try {
           rc.frame = frame_mode_from_string(f.value);
         } catch (const std::invalid_argument& e) {
           f.fail(e.what());
         }
       }},
      {"inner.solver", [&](const Field& f) {
         try {
           rc.inner_solver = inner_solver_from_string(f.value);
         } catch (const std::invalid_argument& e) {
           f.fail(e.what());
         }
       }},
      {"inner.tol", [&](const Field& f) {
         rc.inner_tol = f.positive();
         if (rc.inner_tol > 1e-8) f.fail("must not exceed 1e-8");
       }},
      {"inner.max", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 1) f.fail("must be positive");
         rc.inner_max = static_cast<int>(v);
       }},
      {"seeds.base", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 0) f.fail("must be non-negative");
         rc.seed_base = static_cast<std::uint64_t>(v);
       }},
      {"seeds.count", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 0 || v > 1000000) f.fail("must lie in [0, 1000000]");
         rc.seed_count = static_cast<int>(v);
       }},
      {"initial", [&](const Field& f) {
         const std::string& v = f.value;
         if (v.rfind("image:", 0) == 0) {
           rc.initial.kind = "image";
           rc.initial.image = trim(v.substr(6));
           if (rc.initial.image.empty()) f.fail("image path is empty");
         } else if (v == "cone" || v == "bump" || v == "square" || v == "checkerboard") {
           rc.initial.kind = v;
         } else {
           f.fail("expected cone, bump, square, checkerboard or image:<path>, got '" + v + "'");
         }
       }},
      {"initial.amplitude", [&](const Field& f) { rc.initial.amplitude = f.number(); }},
      {"initial.tiles", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 1 || v > 1024) f.fail("must lie in [1, 1024]");
         rc.initial.tiles = static_cast<int>(v);
       }},
      {"initial.signed", [&](const Field& f) { rc.initial.signed_tiles = f.boolean(); }},
      {"output.stride", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 0) f.fail("must be non-negative");
         rc.state_stride = static_cast<int>(v);
       }},
      {"output.format", [&](const Field& f) {
         if (f.value != "csv" && f.value != "binary") f.fail("expected csv or binary");
         rc.state_format = f.value;
       }},
      {"output.dir", [&](const Field& f) {
         if (f.value.empty()) f.fail("must not be empty");
         rc.output_dir = f.value;
       }},
      {"extinction.threshold", [&](const Field& f) { rc.extinction_threshold = f.positive(); }},
      {"extinction.horizon_factor", [&](const Field& f) { rc.horizon_factor = f.positive(); }},
      {"contraction.pairs", [&](const Field& f) {
         const auto v = f.integer();
         if (v < 1) f.fail("must be positive");
         rc.contraction_pairs = static_cast<int>(v);
       }},
      {"tol.contraction", [&](const Field& f) { rc.contraction_tol = f.positive(); }},
      {"tol.ensemble", [&](const Field& f) { rc.ensemble_tol = f.positive(); }},
      {"tol.vi", [&](const Field& f) { rc.vi_tol = f.positive(); }},
      {"tol.energy", [&](const Field& f) { rc.energy_tol = f.positive(); }},
      {"sweep.exponent_min", [&](const Field& f) { rc.exponent_min = f.number(); }},
      {"sweep.exponent_max", [&](const Field& f) { rc.exponent_max = f.number(); }},
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    }
    Field f{source, lineno, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    const auto it = handlers.find(f.key);
    if (it == handlers.end()) f.fail("unknown key");
    if (!seen.insert(f.key).second) f.fail("duplicate key");
    it->second(f);
  }
  if (rc.exponent_min >= rc.exponent_max) {
    throw FormatError(source + ": sweep.exponent_min must be below sweep.exponent_max");
  }
  if (rc.study == Study::LambdaSweep && rc.lambdas.size() < 2) {
    throw FormatError(source + ": lambdas: lambda-sweep needs at least two values");
  }
  if (rc.study == Study::Ensemble && rc.seed_count < 2) {
    throw FormatError(source + ": seeds.count: ensemble needs at least two seeds");
  }
  if (rc.horizon && rc.dt > *rc.horizon) throw FormatError(source + ": dt: must not exceed horizon");
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  RunConfig rc = parse_config(in, path.string());
  rc.base_dir = std::filesystem::absolute(path).parent_path();
  return rc;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
  };
  os << "study = " << to_string(study) << '\n';
  os << "grid.radius = " << format_double(radius) << '\n';
  os << "grid.n = " << n << '\n';
  os << "transport.omegas = " << list(omegas) << '\n';
  os << "lambda = " << format_double(lambda) << '\n';
  if (!lambdas.empty()) os << "lambdas = " << list(lambdas) << '\n';
  os << "dt = " << format_double(dt) << '\n';
  os << "horizon = " << (horizon ? format_double(*horizon) : std::string("auto")) << '\n';
  os << "scheme = " << to_string(scheme) << '\n';
  os << "frame = " << to_string(frame) << '\n';
  os << "inner.solver = " << to_string(inner_solver) << '\n';
  os << "inner.tol = " << format_double(inner_tol) << '\n';
  os << "inner.max = " << inner_max << '\n';
  os << "seeds.base = " << seed_base << '\n';
  os << "seeds.count = " << seed_count << '\n';
  if (initial.kind == "image") {
    const auto p = initial.image.is_absolute() || base_dir.empty() ? initial.image : base_dir / initial.image;
    os << "initial = image:" << p.string() << '\n';
  } else {
    os << "initial = " << initial.kind << '\n';
  }
  os << "initial.amplitude = " << format_double(initial.amplitude) << '\n';
  os << "initial.tiles = " << initial.tiles << '\n';
  os << "initial.signed = " << (initial.signed_tiles ? "true" : "false") << '\n';
  os << "output.stride = " << state_stride << '\n';
  os << "output.format = " << state_format << '\n';
  os << "output.dir = " << output_dir.string() << '\n';
  os << "extinction.threshold = " << format_double(extinction_threshold) << '\n';
  os << "extinction.horizon_factor = " << format_double(horizon_factor) << '\n';
  os << "contraction.pairs = " << contraction_pairs << '\n';
  os << "tol.contraction = " << format_double(contraction_tol) << '\n';
  os << "tol.ensemble = " << format_double(ensemble_tol) << '\n';
  os << "tol.vi = " << format_double(vi_tol) << '\n';
  os << "tol.energy = " << format_double(energy_tol) << '\n';
  os << "sweep.exponent_min = " << format_double(exponent_min) << '\n';
  os << "sweep.exponent_max = " << format_double(exponent_max) << '\n';
  return os.str();
}

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < seed_count; ++i) out.push_back(seed_base + static_cast<std::uint64_t>(i));
  return out;
}

SolverConfig make_solver_config(const RunConfig& rc, const GridPtr& grid) {
  SolverConfig c;
  c.lambda = rc.lambda;
  c.dt = rc.dt;
  c.horizon = rc.horizon.value_or(rc.dt);
  c.grid = grid;
  c.transport = TransportSystem::from_omegas(rc.omegas);
  c.scheme = rc.scheme;
  c.frame = rc.frame;
  c.inner_solver = rc.inner_solver;
  c.inner_tol = rc.inner_tol;
  c.inner_max = rc.inner_max;
  c.state_stride = 1;
  return c;
}

ScalarField make_initial(const RunConfig& rc, const GridPtr& grid) {
  const double r = grid->radius();
  const double a = rc.initial.amplitude;
  const std::string& kind = rc.initial.kind;
  if (kind == "cone") {
    return ScalarField::from_function(grid, [=](Vec2 p) { return a * std::max(0.0, 1.0 - norm(p) / (0.6 * r)); });
  }
  if (kind == "bump") {
    return ScalarField::from_function(grid, [=](Vec2 p) {
      const Vec2 d = p - Vec2{0.3 * r, 0.1 * r};
      return a * std::exp(-dot(d, d) / (2.0 * 0.04 * r * r));
    });
  }
  if (kind == "square") {
    return ScalarField::from_function(
        grid, [=](Vec2 p) { return std::abs(p.x) < 0.4 * r && std::abs(p.y) < 0.4 * r ? a : 0.0; });
  }
  if (kind == "checkerboard") {
    const int tiles = rc.initial.tiles;
    const double low = rc.initial.signed_tiles ? -a : 0.0;
    return ScalarField::from_function(grid, [=](Vec2 p) {
      const int i = std::clamp(static_cast<int>(std::floor((p.x + r) / (2.0 * r) * tiles)), 0, tiles - 1);
      const int j = std::clamp(static_cast<int>(std::floor((p.y + r) / (2.0 * r) * tiles)), 0, tiles - 1);
      return (i + j) % 2 ? a : low;
    });
  }
  if (kind == "image") {
    const auto path =
        rc.initial.image.is_absolute() || rc.base_dir.empty() ? rc.initial.image : rc.base_dir / rc.initial.image;
    if (!std::filesystem::exists(path)) throw FormatError("initial: image file not found: " + path.string());
    ScalarField u = load_image(path, grid);
    u *= a;
    return u;
  }
  throw FormatError("initial: unknown kind '" + kind + "'");
}

}  // namespace tvflow
