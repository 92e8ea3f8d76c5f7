// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tvflow/grid.hpp"
#include "tvflow/solver.hpp"

namespace tvflow {

/// RFC 4180 writer: CRLF records, fields quoted only when needed, doubles
/// printed with round-trip precision and '.' as decimal separator.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(std::uint64_t v);
  void end_row();
  void row(const std::vector<std::string>& cells);

 private:
  void sep();
  std::ostream& os_;
  bool first_ = true;
};

/// Shortest round-trip decimal text of v in the classic locale.
std::string format_double(double v);

/// t, l2_norm, phi_lambda, dissipation, min_value, energy_residual
void write_diagnostics_csv(const Trajectory& tr, std::ostream& os);

/// n rows of n values over the full cell grid (zero outside the disc).
void write_state_csv(const ScalarField& u, std::ostream& os);

/// n * n little-endian float64 values, row-major, j outer.
void write_state_binary(const ScalarField& u, std::ostream& os);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& p);
std::string sha256_bytes(const std::string& bytes);

}  // namespace tvflow
