#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seisint/catalog.hpp"
#include "seisint/model.hpp"

namespace seisint {

/// Intensity accuracy over cells whose observed intensity is >= 0.5, pooled
/// across all events.
struct IntensityStats {
  double mse = 0.0;
  double pearson_r = 0.0;
  std::size_t n = 0;
};

/// Throws UndefinedCorrelationError when fewer than two cells pool or the
/// observed values have zero variance. Constant predictions give r = 0.
IntensityStats mse_and_r(std::span<const Grid> predictions, std::span<const IntensityGrid> observed);

struct FeltScore {
  double f_score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n = 0;
};

/// Felt/not-felt agreement over station cells: predicted felt is
/// pred >= felt_threshold, observed felt is obs >= 0.5 at an observed cell.
/// Throws ValidationError when no station cell exists.
FeltScore f_score_felt(std::span<const Grid> predictions, std::span<const IntensityGrid> observed,
                       std::span<const std::vector<std::uint8_t>> station_masks,
                       double felt_threshold = kCatalogFloor);

struct EvalReport {
  double mse = 0.0;
  double pearson_r = 0.0;
  double f_score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_intensity_cells = 0;
  std::size_t n_station_cells = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Both metric families with each event's observed mask as its station mask.
EvalReport evaluate(std::span<const Grid> predictions, std::span<const IntensityGrid> observed,
                    double felt_threshold = kCatalogFloor);

/// Canonical JSON object text (sorted keys, shortest round-trip reals).
std::string report_json(const EvalReport& report);
std::string report_summary(std::string_view label, const EvalReport& report);

}  // namespace seisint
