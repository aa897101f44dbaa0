#pragma once

#include <cstddef>
#include <optional>

namespace seisint {

/// Rectangular lat/lon window split into n_cells x n_cells cells that are
/// square on a Mercator map: uniform in longitude and in Mercator ordinate.
struct GridSpec {
  double lat_min_deg = 30.0;
  double lat_max_deg = 46.0;
  double lon_min_deg = 128.0;
  double lon_max_deg = 146.0;
  std::size_t n_cells = 64;

  std::size_t cell_count() const noexcept { return n_cells * n_cells; }
  bool contains(double lat_deg, double lon_deg) const noexcept;

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Row 0 is the northernmost band, column 0 the westernmost.
struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  std::size_t flat(std::size_t n_cells) const noexcept { return row * n_cells + col; }

  bool operator==(const CellIndex&) const = default;
};

struct LatLon {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

/// ln(tan(pi/4 + phi/2)). Throws DomainError when |lat_deg| >= 90.
double mercator_y(double lat_deg);

/// Inverse of mercator_y, in degrees.
double inverse_mercator_y(double y);

/// Cell containing the point, or nullopt outside the rectangle. Points on the
/// northern or eastern edge clamp into the last cell.
std::optional<CellIndex> cell_of(double lat_deg, double lon_deg, const GridSpec& spec);

/// Longitude is the linear midpoint of the column band; latitude is the
/// inverse Mercator of the midpoint of the row's y band.
LatLon cell_center(CellIndex idx, const GridSpec& spec);

}  // namespace seisint
