// SPDX-License-Identifier: Apache-2.0
//
// tvflow run <config> [--output-dir DIR] [--workers N] [--seed-base S]
// tvflow run --verify-only <manifest>
//
// Exit status: 0 when every check passed, 1 on a failed check or sample,
// 2 on configuration or I/O errors.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "tvflow/error.hpp"
#include "tvflow/harness.hpp"

namespace {

void print_checks(const tvflow::RunManifest& m) {
  for (const auto& c : m.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' ' << c.tolerance
              << '\n';
  }
  for (const auto& e : m.errors) std::cout << "ERROR " << e << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic total variation flow solver and verification harness"};
  app.set_version_flag("--version", tvflow::version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute the study described by a config file");
  std::string config_path;
  std::string output_dir;
  std::string manifest_path;
  int workers = 0;
  std::uint64_t seed_base = 0;
  bool quiet = false;
  run->add_option("config", config_path, "Config file (key = value lines)");
  run->add_option("--output-dir", output_dir, "Override output.dir");
  auto* w = run->add_option("--workers", workers, "Concurrent samples (default: $TVFLOW_WORKERS or core count)");
  w->check(CLI::PositiveNumber);
  auto* sb = run->add_option("--seed-base", seed_base, "Override seeds.base");
  auto* vo = run->add_option("--verify-only", manifest_path, "Re-run a manifest and compare outputs by hash");
  run->add_flag("-q,--quiet", quiet, "No progress messages");
  vo->excludes(sb);

  CLI11_PARSE(app, argc, argv);

  tvflow::RunOptions opts;
  opts.workers = workers;
  if (!output_dir.empty()) opts.output_dir = output_dir;
  if (*sb) opts.seed_base = seed_base;
  if (!quiet) opts.log = &std::cerr;

  try {
    if (!manifest_path.empty()) {
      if (!config_path.empty()) {
        std::cerr << "tvflow: --verify-only takes no config file\n";
        return 2;
      }
      const tvflow::ReproduceReport rep = tvflow::verify_manifest(manifest_path, opts);
      for (const auto& m : rep.mismatches) std::cout << "MISMATCH " << m << '\n';
      std::cout << (rep.identical ? "reproduced " : "differs ") << rep.rerun.outputs.size() << " outputs\n";
      return rep.identical ? 0 : 1;
    }
    if (config_path.empty()) {
      std::cerr << "tvflow: run needs a config file or --verify-only\n";
      return 2;
    }
    const tvflow::RunManifest m = tvflow::run(tvflow::load_config(config_path), opts);
    print_checks(m);
    std::cout << (m.pass ? "pass" : "FAIL") << '\n';
    return m.pass ? 0 : 1;
  } catch (const tvflow::FormatError& e) {
    std::cerr << "tvflow: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tvflow: " << e.what() << '\n';
    return 2;
  }
}
