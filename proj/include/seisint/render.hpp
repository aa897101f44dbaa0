#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seisint/model.hpp"

namespace seisint {

/// n lines of n comma-separated reals, row 0 = north.
std::string grid_to_csv(const Grid& grid);

/// Throws ParseError on ragged, non-square or non-numeric input.
Grid grid_from_csv(std::istream& in, const std::string& source = "grid.csv");

/// Intensity 0..7 mapped linearly onto 0..255.
std::uint8_t intensity_pixel(double intensity);

/// JMA class index (0..9) spread over 0..255.
std::uint8_t class_pixel(double intensity);

/// Binary PGM (P5), one byte per cell.
std::vector<char> render_pgm(const Grid& grid, bool classes);

}  // namespace seisint
