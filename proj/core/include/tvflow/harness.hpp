// SPDX-License-Identifier: Apache-2.0
//
// Batch studies driven by a RunConfig. Every study writes CSV outputs, a
// JSON summary and a manifest listing each output with its SHA-256, so a run
// can be repeated and compared byte for byte.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvflow/config.hpp"

namespace tvflow {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  /// "<=" or ">=": the check is value <relation> tolerance.
  std::string relation = "<=";
  bool pass = false;
};

struct OutputFile {
  /// Relative to the output directory, '/' separated.
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string version;
  std::string study;
  /// Canonical config text; parsing it reproduces the run.
  std::string config_text;
  std::vector<std::uint64_t> seeds;
  double wall_clock_seconds = 0.0;
  std::vector<OutputFile> outputs;
  std::vector<CheckResult> checks;
  /// Named scalars reported alongside the checks (rho_hat, horizon, ...).
  std::vector<std::pair<std::string, double>> info;
  /// Per-sample failures ("seed 7: ...") and study-level errors.
  std::vector<std::string> errors;
  bool pass = false;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

struct RunOptions {
  /// Overrides output.dir of the config.
  std::optional<std::filesystem::path> output_dir;
  /// 0 selects default_workers().
  int workers = 0;
  std::optional<std::uint64_t> seed_base;
  /// Progress messages; null for silence.
  std::ostream* log = nullptr;
};

/// Library version string.
std::string version();

/// TVFLOW_WORKERS if set to a positive integer, otherwise hardware concurrency.
int default_workers();

/// Executes the configured study, writes outputs plus summary.json and
/// manifest.json. manifest.pass is true iff every check passed and no sample failed.
RunManifest run(RunConfig config, const RunOptions& opts = {});

struct ReproduceReport {
  bool identical = false;
  std::vector<std::string> mismatches;
  RunManifest rerun;
};

/// Re-runs the manifest's config into opts.output_dir (default: "<manifest dir>/reproduce")
/// and compares every listed output by content hash.
ReproduceReport verify_manifest(const std::filesystem::path& manifest, const RunOptions& opts = {});

}  // namespace tvflow
