// SPDX-License-Identifier: Apache-2.0
#include "tvflow/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "tvflow/error.hpp"

namespace tvflow {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf.data(), p);
}

CsvWriter::CsvWriter(std::ostream& os) : os_(os) {}

void CsvWriter::sep() {
  if (!first_) os_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::field(const std::string& s) {
  sep();
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    os_ << s;
    return *this;
  }
  os_ << '"';
  for (char c : s) {
    if (c == '"') os_ << '"';
    os_ << c;
  }
  os_ << '"';
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  sep();
  os_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long long v) {
  sep();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t v) {
  sep();
  os_ << v;
  return *this;
}

void CsvWriter::end_row() {
  os_ << "\r\n";
  first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (const auto& c : cells) field(c);
  end_row();
}

void write_diagnostics_csv(const Trajectory& tr, std::ostream& os) {
  CsvWriter w(os);
  w.row({"t", "l2_norm", "phi_lambda", "dissipation", "min_value", "energy_residual"});
  for (const auto& d : tr.diagnostics) {
    w.field(d.time).field(d.l2_norm).field(d.phi_lambda).field(d.dissipation).field(d.min_value).field(
        d.energy_residual);
    w.end_row();
  }
}

void write_state_csv(const ScalarField& u, std::ostream& os) {
  CsvWriter w(os);
  const int n = u.grid().n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) w.field(u.at(i, j));
    w.end_row();
  }
}

void write_state_binary(const ScalarField& u, std::ostream& os) {
  static_assert(sizeof(double) == 8);
  const int n = u.grid().n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(u.at(i, j));
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      os.write(bytes, 8);
    }
  }
}

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_.get(), data, len) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw Error("SHA-256 final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace tvflow
