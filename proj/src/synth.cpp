#include "seisint/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMinDistanceKm = 1.0;

std::string synth_origin_time(std::size_t i) {
  // One event every 6 hours from 2000-01-01, with 30-day months.
  const std::size_t hours = i * 6;
  const std::size_t days = hours / 24;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu-%02zu-%02zuT%02zu:00:00Z", 2000 + days / 360,
                days % 360 / 30 + 1, days % 30 + 1, hours % 24);
  return buf;
}

}  // namespace

void AttenuationParams::validate() const {
  if (!(noise_sd >= 0.0)) throw ValidationError("synth: noise_sd must be >= 0");
  if (!(station_density > 0.0)) throw ValidationError("synth: station_density must be > 0");
}

double hypocentral_distance_km(const HypocenterEvent& event, double station_lat_deg,
                               double station_lon_deg) {
  const double phi1 = event.lat_deg * kDegToRad;
  const double phi2 = station_lat_deg * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (station_lon_deg - event.lon_deg) * kDegToRad;
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  const double epicentral = 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
  return std::hypot(epicentral, event.depth_km);
}

std::optional<double> synth_intensity(double magnitude, double distance_km,
                                      const AttenuationParams& params, random::Engine& rng) {
  if (!(distance_km > 0.0)) throw DomainError("synth_intensity: distance must be > 0");
  double v = params.a * magnitude - params.b * std::log10(distance_km) - params.c * distance_km;
  if (params.noise_sd > 0.0) v += random::normal(rng, 0.0, params.noise_sd);
  v = std::min(v, kSynthIntensityCap);
  if (v < kCatalogFloor) return std::nullopt;
  return v;
}

std::vector<HypocenterEvent> generate_catalog(std::size_t n_events, const AttenuationParams& params,
                                              std::uint64_t seed, const GridSpec& spec) {
  if (n_events == 0) throw ValidationError("generate_catalog: n_events must be >= 1");
  params.validate();
  spec.validate();
  random::Engine rng(seed);

  struct Station {
    double lat, lon;
  };
  const auto n_stations = static_cast<std::size_t>(std::llround(params.station_density));
  std::vector<Station> network;
  for (std::size_t s = 0; s < n_stations; ++s) {
    const double lat = random::uniform(rng, spec.lat_min_deg, spec.lat_max_deg);
    const double lon = random::uniform(rng, spec.lon_min_deg, spec.lon_max_deg);
    network.push_back({lat, lon});
  }

  std::vector<HypocenterEvent> events;
  events.reserve(n_events);
  for (std::size_t i = 0; i < n_events; ++i) {
    HypocenterEvent ev;
    char id[32];
    std::snprintf(id, sizeof id, "syn%06zu", i + 1);
    ev.event_id = id;
    ev.origin_time = synth_origin_time(i);
    ev.lat_deg = random::uniform(rng, spec.lat_min_deg, spec.lat_max_deg);
    ev.lon_deg = random::uniform(rng, spec.lon_min_deg, spec.lon_max_deg);
    ev.depth_km = random::uniform(rng, 0.0, 600.0);
    ev.magnitude = random::uniform(rng, 5.0, 8.0);
    for (const auto& st : network) {
      const double r = std::max(kMinDistanceKm, hypocentral_distance_km(ev, st.lat, st.lon));
      if (auto v = synth_intensity(ev.magnitude, r, params, rng)) {
        ev.observations.push_back({st.lat, st.lon, *v, intensity_to_jma_class(*v)});
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace seisint
