#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seisint/geo_grid.hpp"

namespace seisint {

/// JMA seismic intensity classes in ascending order.
enum class JmaClass : std::uint8_t {
  k0, k1, k2, k3, k4, k5Lower, k5Upper, k6Lower, k6Upper, k7
};

inline constexpr std::size_t kJmaClassCount = 10;

/// Lowest instrumental intensity the catalog records.
inline constexpr double kCatalogFloor = 0.5;

/// Half-open bins: <0.5, [0.5,1.5), ..., [4.5,5.0) 5-, [5.0,5.5) 5+, ..., >=6.5 7.
/// Throws DomainError on NaN.
JmaClass intensity_to_jma_class(double instrumental_intensity);

/// CSV spelling: 0,1,2,3,4,5L,5U,6L,6U,7.
std::string_view jma_class_label(JmaClass c);
JmaClass parse_jma_class(std::string_view label);

struct StationObservation {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double instrumental_intensity = 0.0;
  JmaClass jma_class = JmaClass::k0;

  bool operator==(const StationObservation&) const = default;
};

struct HypocenterEvent {
  std::string event_id;
  std::string origin_time;  // ISO-8601, kept verbatim
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double depth_km = 0.0;
  double magnitude = 0.0;
  std::vector<StationObservation> observations;

  bool operator==(const HypocenterEvent&) const = default;
};

/// Per-cell instrumental intensity; 0 and unmasked where no station reports.
struct IntensityGrid {
  std::size_t n_cells = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> observed_mask;

  explicit IntensityGrid(std::size_t n = 0)
      : n_cells(n), values(n * n, 0.0), observed_mask(n * n, 0) {}

  std::size_t size() const noexcept { return values.size(); }
  std::size_t observed_count() const noexcept;
};

struct DatasetSplit {
  std::vector<HypocenterEvent> train;
  std::vector<HypocenterEvent> test;
};

/// Parses events.csv and observations.csv (see README for the column layout)
/// and joins observations onto events by event_id. `events_name` and
/// `observations_name` only label error messages.
std::vector<HypocenterEvent> parse_catalog(std::istream& events_csv, std::istream& observations_csv,
                                           const std::string& events_name = "events.csv",
                                           const std::string& observations_name = "observations.csv");

/// Reads DIR/events.csv and DIR/observations.csv.
std::vector<HypocenterEvent> load_catalog(const std::filesystem::path& dir);

/// Inverse of parse_catalog. Reals are written in shortest round-trip form.
void write_catalog(std::span<const HypocenterEvent> events, std::ostream& events_csv,
                   std::ostream& observations_csv);

/// Max-aggregates in-bounds stations per cell; out-of-bounds stations are skipped.
IntensityGrid rasterize(const HypocenterEvent& event, const GridSpec& spec);

/// Seeded Fisher-Yates shuffle followed by a prefix/suffix cut with
/// |train| = round(train_fraction * N). The shuffle walks i = N-1 .. 1 and
/// swaps i with j = mt19937_64() % (i + 1).
DatasetSplit split_dataset(std::span<const HypocenterEvent> events, double train_fraction,
                           std::uint64_t seed);

std::vector<HypocenterEvent> filter_min_magnitude(std::span<const HypocenterEvent> events,
                                                  double min_magnitude);

}  // namespace seisint
