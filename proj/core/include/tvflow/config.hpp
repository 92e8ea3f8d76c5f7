// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a flat `key = value` text file, one key per line, `#`
// starts a comment. Lists are comma separated. See README.md for the keys.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvflow/solver.hpp"

namespace tvflow {

enum class Study { Single, Ensemble, LambdaSweep, Extinction, ViCheck, Contraction, UnitProperties };

std::string to_string(Study s);
Study study_from_string(const std::string& s);

/// Initial datum: a builtin shape or a PGM image.
struct InitialSpec {
  /// cone, bump, square, checkerboard or image
  std::string kind = "cone";
  std::filesystem::path image;
  double amplitude = 1.0;
  /// Checkerboard tiles per axis over [-R, R].
  int tiles = 8;
  /// Checkerboard values +-amplitude (true) or {0, amplitude}.
  bool signed_tiles = true;
};

struct RunConfig {
  Study study = Study::Single;
  double radius = 1.0;
  int n = 64;
  std::vector<double> omegas;
  double lambda = 0.1;
  std::vector<double> lambdas;
  double dt = 1e-3;
  /// Absent means "derive from the study" (extinction: factor * |x| / rho_hat).
  std::optional<double> horizon;
  Scheme scheme = Scheme::Rescaled;
  FrameMode frame = FrameMode::Equivariant;
  InnerSolver inner_solver = InnerSolver::Newton;
  double inner_tol = 1e-10;
  int inner_max = 200;
  std::uint64_t seed_base = 1;
  /// 0 selects the deterministic path beta == 0.
  int seed_count = 0;
  InitialSpec initial;
  /// Snapshot stride; 0 writes no states.
  int state_stride = 0;
  /// csv or binary
  std::string state_format = "csv";
  std::filesystem::path output_dir = "tvflow-out";

  double extinction_threshold = 1e-8;
  double horizon_factor = 4.0;
  int contraction_pairs = 10;
  double contraction_tol = 0.02;
  double ensemble_tol = 0.05;
  /// VI tolerance is vi_tol * (1 + |x|^2).
  double vi_tol = 0.02;
  /// Energy residual tolerance relative to |x|^2.
  double energy_tol = 0.01;
  double exponent_min = 0.7;
  double exponent_max = 1.3;

  /// Directory of the config file; relative image paths resolve against it.
  std::filesystem::path base_dir;

  /// Canonical `key = value` text; parsing it yields an equal config.
  std::string to_text() const;
  std::vector<std::uint64_t> seeds() const;
};

/// Throws FormatError with "<source>:<line>: <key>: <problem>" diagnostics.
RunConfig parse_config(std::istream& is, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Builds the solver config, grid and transport for a run.
SolverConfig make_solver_config(const RunConfig& rc, const GridPtr& grid);

/// Builtin shapes or the PGM image, on the given grid.
ScalarField make_initial(const RunConfig& rc, const GridPtr& grid);

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "TVFLOW_WORKERS";

}  // namespace tvflow
