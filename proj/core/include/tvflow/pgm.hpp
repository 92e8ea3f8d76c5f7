// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow {

/// 8-bit grayscale raster, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;

  unsigned char at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Reads P2 (ASCII) or P5 (binary) PGM with maxval <= 255. Throws FormatError.
GrayImage read_pgm(std::istream& is);
GrayImage read_pgm(const std::filesystem::path& p);

/// Writes binary P5.
void write_pgm(const GrayImage& img, std::ostream& os);

/// Maps the image onto [-R, R]^2 (top row at y = +R), scales to [0, 1],
/// area-averages onto grid cells and masks to the disc.
ScalarField image_to_field(const GrayImage& img, const GridPtr& grid);

ScalarField load_image(const std::filesystem::path& p, const GridPtr& grid);

}  // namespace tvflow
