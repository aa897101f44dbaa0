#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seisint/catalog.hpp"
#include "seisint/geo_grid.hpp"
#include "seisint/random.hpp"

namespace seisint {

/// I = a*M - b*log10(R) - c*R + noise, capped at 7.0.
struct AttenuationParams {
  double a = 1.7;
  double b = 2.0;
  double c = 0.003;
  double noise_sd = 0.2;
  double station_density = 150.0;

  void validate() const;
};

inline constexpr double kSynthIntensityCap = 7.0;
inline constexpr double kEarthRadiusKm = 6371.0;

/// Haversine epicentral distance on a 6371 km sphere combined with depth.
double hypocentral_distance_km(const HypocenterEvent& event, double station_lat_deg,
                               double station_lon_deg);

/// Noisy intensity at hypocentral distance `distance_km` (> 0), or nullopt
/// when it falls below the 0.5 catalog floor.
std::optional<double> synth_intensity(double magnitude, double distance_km,
                                      const AttenuationParams& params, random::Engine& rng);

/// Uniform epicentres over the grid rectangle, depth in [0, 600] km,
/// magnitude in [5.0, 8.0]. One network of round(station_density) stations is
/// drawn uniformly over the rectangle and every event is observed on it;
/// readings below the floor are dropped. Hypocentral distances are floored
/// at 1 km.
std::vector<HypocenterEvent> generate_catalog(std::size_t n_events, const AttenuationParams& params,
                                              std::uint64_t seed, const GridSpec& spec);

}  // namespace seisint
