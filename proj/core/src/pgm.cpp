// SPDX-License-Identifier: Apache-2.0
#include "tvflow/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tvflow/error.hpp"

namespace tvflow {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) return tok;
    } else {
      tok += static_cast<char>(c);
    }
    c = is.get();
  }
  return tok;
}

int header_int(std::istream& is, const char* what) {
  const std::string tok = header_token(is);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char ch) { return std::isdigit(ch); }) ||
      tok.size() > 9) {
    throw FormatError(std::string("PGM header: bad ") + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

GrayImage read_pgm(std::istream& is) {
  const std::string magic = header_token(is);
  if (magic != "P2" && magic != "P5") throw FormatError("unsupported image format '" + magic + "' (need P2 or P5)");
  GrayImage img;
  img.width = header_int(is, "width");
  img.height = header_int(is, "height");
  const int maxval = header_int(is, "maxval");
  if (img.width < 1 || img.height < 1) throw FormatError("PGM header: empty image");
  if (maxval < 1 || maxval > 255) throw FormatError("PGM: only 8-bit images are supported");
  if (static_cast<long long>(img.width) * img.height > (1LL << 28)) throw FormatError("PGM: image too large");
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(count);
  auto scale = [maxval](int v) { return static_cast<unsigned char>(std::lround(255.0 * v / maxval)); };
  if (magic == "P5") {
    std::string raw(count, '\0');
    is.read(raw.data(), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(is.gcount()) != count) throw FormatError("PGM: truncated pixel data");
    for (std::size_t k = 0; k < count; ++k) {
      const int v = static_cast<unsigned char>(raw[k]);
      if (v > maxval) throw FormatError("PGM: pixel exceeds maxval");
      img.pixels[k] = scale(v);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const std::string tok = header_token(is);
      if (tok.empty()) throw FormatError("PGM: truncated pixel data");
      if (!std::all_of(tok.begin(), tok.end(), [](unsigned char ch) { return std::isdigit(ch); }) || tok.size() > 3) {
        throw FormatError("PGM: bad pixel '" + tok + "'");
      }
      const int v = std::stoi(tok);
      if (v > maxval) throw FormatError("PGM: pixel exceeds maxval");
      img.pixels[k] = scale(v);
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + p.string());
  return read_pgm(in);
}

void write_pgm(const GrayImage& img, std::ostream& os) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

ScalarField image_to_field(const GrayImage& img, const GridPtr& grid) {
  const Grid& g = *grid;
  const double r = g.radius();
  const double h = g.h();
  // Pixel (x, y) covers [x, x+1] x [y, y+1] in pixel units.
  const double sx = img.width / (2.0 * r);
  const double sy = img.height / (2.0 * r);
  ScalarField u(grid);
  for (auto c : g.mask_cells()) {
    const int i = g.col(c);
    const int j = g.row(c);
    const double x0 = (i * h) * sx;
    const double x1 = ((i + 1) * h) * sx;
    // Grid row j counts upwards from y = -R, image rows count down from y = +R.
    const double y0 = (2.0 * r - (j + 1) * h) * sy;
    const double y1 = (2.0 * r - j * h) * sy;
    double sum = 0.0;
    double area = 0.0;
    for (int py = std::max(0, static_cast<int>(std::floor(y0))); py < std::min(img.height, static_cast<int>(std::ceil(y1))); ++py) {
      const double wy = std::min<double>(py + 1, y1) - std::max<double>(py, y0);
      if (wy <= 0.0) continue;
      for (int px = std::max(0, static_cast<int>(std::floor(x0))); px < std::min(img.width, static_cast<int>(std::ceil(x1))); ++px) {
        const double wx = std::min<double>(px + 1, x1) - std::max<double>(px, x0);
        if (wx <= 0.0) continue;
        sum += wx * wy * img.at(px, py);
        area += wx * wy;
      }
    }
    u[c] = area > 0.0 ? sum / (255.0 * area) : 0.0;
  }
  return u;
}

ScalarField load_image(const std::filesystem::path& p, const GridPtr& grid) { return image_to_field(read_pgm(p), grid); }

}  // namespace tvflow
