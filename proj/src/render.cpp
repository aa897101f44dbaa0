#include "seisint/render.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "seisint/catalog.hpp"
#include "seisint/error.hpp"
#include "seisint/text.hpp"

namespace seisint {

std::string grid_to_csv(const Grid& grid) {
  std::string out;
  for (std::size_t r = 0; r < grid.n_cells; ++r) {
    for (std::size_t c = 0; c < grid.n_cells; ++c) {
      if (c) out += ',';
      out += text::format_real(grid.values[r * grid.n_cells + c]);
    }
    out += '\n';
  }
  return out;
}

Grid grid_from_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = text::strip_cr(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto field : text::split(line, ',')) {
      auto v = text::parse_real(field);
      if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "bad value '" + std::string(field) + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, line_no, "row has " + std::to_string(row.size()) + " values, expected " +
                                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source, 0, "empty grid");
  if (rows.size() != rows.front().size()) {
    throw ParseError(source, 0, "grid is " + std::to_string(rows.size()) + "x" +
                                    std::to_string(rows.front().size()) + ", expected square");
  }
  Grid g(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(rows[r].begin(), rows[r].end(), g.values.begin() + static_cast<std::ptrdiff_t>(r * g.n_cells));
  return g;
}

std::uint8_t intensity_pixel(double intensity) {
  const double v = std::clamp(intensity, 0.0, 7.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * v / 7.0));
}

std::uint8_t class_pixel(double intensity) {
  const auto idx = static_cast<double>(intensity_to_jma_class(intensity));
  return static_cast<std::uint8_t>(std::lround(255.0 * idx / static_cast<double>(kJmaClassCount - 1)));
}

std::vector<char> render_pgm(const Grid& grid, bool classes) {
  const std::string header =
      "P5\n" + std::to_string(grid.n_cells) + " " + std::to_string(grid.n_cells) + "\n255\n";
  std::vector<char> out(header.begin(), header.end());
  for (double v : grid.values) {
    out.push_back(static_cast<char>(classes ? class_pixel(v) : intensity_pixel(v)));
  }
  return out;
}

}  // namespace seisint
