#include "seisint/geo_grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::size_t band_index(double fraction, std::size_t n) {
  auto i = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  return i >= n ? n - 1 : i;
}

}  // namespace

bool GridSpec::contains(double lat_deg, double lon_deg) const noexcept {
  return lat_deg >= lat_min_deg && lat_deg <= lat_max_deg && lon_deg >= lon_min_deg &&
         lon_deg <= lon_max_deg;
}

void GridSpec::validate() const {
  auto ok_lat = [](double v) { return std::isfinite(v) && v > -90.0 && v < 90.0; };
  if (!ok_lat(lat_min_deg) || !ok_lat(lat_max_deg) || !(lat_min_deg < lat_max_deg)) {
    throw ValidationError("grid: need -90 < lat_min < lat_max < 90");
  }
  if (!std::isfinite(lon_min_deg) || !std::isfinite(lon_max_deg) || !(lon_min_deg < lon_max_deg)) {
    throw ValidationError("grid: need lon_min < lon_max");
  }
  if (n_cells < 1) throw ValidationError("grid: n_cells must be >= 1");
}

double mercator_y(double lat_deg) {
  if (!(std::abs(lat_deg) < 90.0)) {
    throw DomainError("mercator_y: latitude " + std::to_string(lat_deg) + " outside (-90, 90)");
  }
  return std::log(std::tan(std::numbers::pi / 4.0 + lat_deg * kDegToRad / 2.0));
}

double inverse_mercator_y(double y) {
  return (2.0 * std::atan(std::exp(y)) - std::numbers::pi / 2.0) / kDegToRad;
}

std::optional<CellIndex> cell_of(double lat_deg, double lon_deg, const GridSpec& spec) {
  if (!spec.contains(lat_deg, lon_deg)) return std::nullopt;
  const double y_top = mercator_y(spec.lat_max_deg);
  const double y_bottom = mercator_y(spec.lat_min_deg);
  const double col_frac = (lon_deg - spec.lon_min_deg) / (spec.lon_max_deg - spec.lon_min_deg);
  const double row_frac = (y_top - mercator_y(lat_deg)) / (y_top - y_bottom);
  return CellIndex{band_index(row_frac, spec.n_cells), band_index(col_frac, spec.n_cells)};
}

LatLon cell_center(CellIndex idx, const GridSpec& spec) {
  const double n = static_cast<double>(spec.n_cells);
  const double lon_step = (spec.lon_max_deg - spec.lon_min_deg) / n;
  const double y_top = mercator_y(spec.lat_max_deg);
  const double y_step = (y_top - mercator_y(spec.lat_min_deg)) / n;
  const double lon = spec.lon_min_deg + (static_cast<double>(idx.col) + 0.5) * lon_step;
  const double y = y_top - (static_cast<double>(idx.row) + 0.5) * y_step;
  return {inverse_mercator_y(y), lon};
}

}  // namespace seisint
