// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "tvflow/error.hpp"
#include "tvflow/io.hpp"
#include "tvflow/pgm.hpp"
#include "tvflow/regularization.hpp"

namespace {

using namespace tvflow;

GrayImage checker_image(int size, int tile) {
  GrayImage img;
  img.width = img.height = size;
  img.pixels.resize(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.pixels[static_cast<std::size_t>(y) * size + x] = ((x / tile + y / tile) % 2) ? 255 : 0;
  }
  return img;
}

GrayImage parse(const std::string& s) {
  std::istringstream is(s);
  return read_pgm(is);
}

TEST(Csv, QuotingAndLineEndings) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"a", "b,c", "say \"hi\"", "line\nbreak"});
  w.field(1.5).field(-2LL).field(std::uint64_t{18446744073709551615ULL}).field(std::string());
  w.end_row();
  EXPECT_EQ(os.str(), "a,\"b,c\",\"say \"\"hi\"\"\",\"line\nbreak\"\r\n1.5,-2,18446744073709551615,\r\n");
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1e-10, std::numeric_limits<double>::max()}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1e-3), "0.001");
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_bytes(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_bytes("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto p = std::filesystem::temp_directory_path() / "tvflow_sha_test.bin";
  {
    std::ofstream f(p, std::ios::binary);
    f << "abc";
  }
  EXPECT_EQ(sha256_file(p), sha256_bytes("abc"));
  std::filesystem::remove(p);
  EXPECT_THROW(sha256_file(p), Error);
}

TEST(StateOutput, CsvAndBinaryLayouts) {
  const auto g = Grid::build(1.0, 8);
  ScalarField u(g);
  u.at(3, 4) = 0.25;
  std::ostringstream csv;
  write_state_csv(u, csv);
  const std::string text = csv.str();
  int rows = 0;
  for (std::size_t p = text.find("\r\n"); p != std::string::npos; p = text.find("\r\n", p + 2)) ++rows;
  EXPECT_EQ(rows, 8);
  EXPECT_NE(text.find("0.25"), std::string::npos);

  std::ostringstream bin;
  write_state_binary(u, bin);
  const std::string raw = bin.str();
  ASSERT_EQ(raw.size(), 64u * 8u);
  double v = 0.0;
  std::memcpy(&v, raw.data() + 8 * (4 * 8 + 3), 8);
  EXPECT_EQ(v, 0.25);
}

TEST(Pgm, ParsesAsciiAndBinary) {
  const GrayImage a = parse("P2\n# comment\n3 2\n# another\n255\n0 128 255\n10 20 30\n");
  EXPECT_EQ(a.width, 3);
  EXPECT_EQ(a.height, 2);
  EXPECT_EQ(a.at(1, 0), 128);
  EXPECT_EQ(a.at(2, 1), 30);
  const GrayImage small = parse("P2 2 1 15 15 0");
  EXPECT_EQ(small.at(0, 0), 255);
  EXPECT_EQ(small.at(1, 0), 0);

  std::ostringstream os;
  write_pgm(a, os);
  const GrayImage b = parse(os.str());
  EXPECT_EQ(b.width, a.width);
  EXPECT_EQ(b.pixels, a.pixels);
  EXPECT_EQ(os.str().substr(0, 2), "P5");
}

TEST(Pgm, RejectsUnsupportedOrCorrupt) {
  EXPECT_THROW(parse("P6\n1 1\n255\nabc"), FormatError);
  EXPECT_THROW(parse("P3\n1 1\n255\n0"), FormatError);
  EXPECT_THROW(parse("P2\n1 x\n255\n0"), FormatError);
  EXPECT_THROW(parse("P2\n0 1\n255\n"), FormatError);
  EXPECT_THROW(parse("P2\n1 1\n65535\n0"), FormatError);
  EXPECT_THROW(parse("P2\n2 2\n255\n0 1 2"), FormatError);
  EXPECT_THROW(parse("P2\n1 1\n100\n200"), FormatError);
  EXPECT_THROW(parse("P5\n4 4\n255\nab"), FormatError);
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(read_pgm(std::filesystem::path("/nonexistent/file.pgm")), FormatError);
}

TEST(Pgm, WhiteAndBlackImages) {
  const auto g = Grid::build(1.0, 32);
  for (int value : {255, 0}) {
    GrayImage img;
    img.width = 37;
    img.height = 23;
    img.pixels.assign(37u * 23u, static_cast<unsigned char>(value));
    const ScalarField u = image_to_field(img, g);
    for (std::size_t k = 0; k < g->storage_size(); ++k) {
      EXPECT_NEAR(u[k], g->in_mask(k) && value == 255 ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Pgm, OrientationTopRowIsUp) {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {255, 255, 0, 0};
  const auto g = Grid::build(1.0, 16);
  const ScalarField u = image_to_field(img, g);
  EXPECT_DOUBLE_EQ(u.at(8, 12), 1.0);
  EXPECT_DOUBLE_EQ(u.at(8, 3), 0.0);
}

TEST(Pgm, CheckerboardEdgeCount) {
  const auto g = Grid::build(1.0, 64);
  const ScalarField u = image_to_field(checker_image(128, 16), g);
  ASSERT_GT(tv_phi(u), 0.0);
  // Oracle: unit-height jumps between neighbouring cells, counting the
  // zero extension outside the disc, each of length h.
  int edges = 0;
  for (int j = -1; j < 64; ++j) {
    for (int i = -1; i < 64; ++i) {
      if (std::abs(u.at(i + 1, j) - u.at(i, j)) > 0.5) ++edges;
      if (std::abs(u.at(i, j + 1) - u.at(i, j)) > 0.5) ++edges;
    }
  }
  const double expect = edges * g->h();
  EXPECT_NEAR(tv_phi(u), expect, 0.1 * expect);
}

TEST(Pgm, AreaAveragingOfSubPixelCells) {
  // 1 pixel wide stripes: each grid cell of a 4x4 grid covers 16 columns
  // and averages to one half.
  GrayImage img;
  img.width = img.height = 64;
  img.pixels.resize(64u * 64u);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img.pixels[static_cast<std::size_t>(y) * 64 + x] = x % 2 ? 255 : 0;
  }
  const auto g = Grid::build(1.0, 8);
  const ScalarField u = image_to_field(img, g);
  for (auto c : g->mask_cells()) EXPECT_NEAR(u[c], 0.5, 1e-12);
}

}  // namespace
