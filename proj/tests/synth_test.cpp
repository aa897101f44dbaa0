#include <gtest/gtest.h>

#include <sstream>

#include "seisint/error.hpp"
#include "seisint/synth.hpp"
#include "test_support.hpp"

namespace seisint {
namespace {

using testing::make_event;

AttenuationParams noiseless() {
  AttenuationParams p;
  p.noise_sd = 0.0;
  return p;
}

TEST(Distance, Haversine) {
  EXPECT_NEAR(hypocentral_distance_km(make_event("a", 38, 137, 0, 6), 39, 137), 111.19492664455873, 1e-9);
  // Tokyo to Osaka, reference from the cross-product form of the great-circle angle.
  const auto tokyo = make_event("t", 35.6762, 139.6503, 40, 6);
  EXPECT_NEAR(hypocentral_distance_km(tokyo, 34.6937, 135.5023), 394.4744845562496, 1e-8);
  EXPECT_DOUBLE_EQ(hypocentral_distance_km(make_event("d", 38, 137, 30, 6), 38, 137), 30.0);
}

TEST(SynthIntensity, WorkedValues) {
  random::Engine rng(1);
  EXPECT_EQ(*synth_intensity(6.0, 10.0, noiseless(), rng), 7.0);  // 8.17 capped
  EXPECT_FALSE(synth_intensity(5.0, 1000.0, noiseless(), rng));   // -0.5
  EXPECT_NEAR(*synth_intensity(6.0, 100.0, noiseless(), rng), 5.9, 1e-12);
  EXPECT_THROW(synth_intensity(6.0, 0.0, noiseless(), rng), DomainError);
}

TEST(SynthIntensity, MonotoneWithoutNoise) {
  random::Engine rng(1);
  const auto p = noiseless();
  for (double r = 20.0; r < 800.0; r += 7.0) {
    const auto near = synth_intensity(6.5, r, p, rng), far = synth_intensity(6.5, r + 7.0, p, rng);
    if (!far) continue;
    ASSERT_TRUE(near);
    if (*near < 7.0) {
      EXPECT_GT(*near, *far);
    }
  }
  for (double m = 5.0; m < 8.0; m += 0.1) {
    const auto lo = synth_intensity(m, 300.0, p, rng), hi = synth_intensity(m + 0.1, 300.0, p, rng);
    if (!lo) continue;
    ASSERT_TRUE(hi);
    if (*hi < 7.0) {
      EXPECT_GT(*hi, *lo);
    }
  }
}

TEST(SynthIntensity, SeededNoiseIsReproducible) {
  random::Engine a(42), b(42);
  const AttenuationParams p;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(synth_intensity(7.0, 200.0, p, a), synth_intensity(7.0, 200.0, p, b));
}

TEST(GenerateCatalog, RangesAndFloor) {
  const GridSpec spec;
  const auto events = generate_catalog(200, AttenuationParams{}, 9, spec);
  ASSERT_EQ(events.size(), 200u);
  std::size_t with_obs = 0;
  for (const auto& e : events) {
    EXPECT_TRUE(spec.contains(e.lat_deg, e.lon_deg));
    EXPECT_GE(e.depth_km, 0.0);
    EXPECT_LE(e.depth_km, 600.0);
    EXPECT_GE(e.magnitude, 5.0);
    EXPECT_LE(e.magnitude, 8.0);
    EXPECT_LE(e.observations.size(), 150u);
    with_obs += !e.observations.empty();
    for (const auto& o : e.observations) {
      EXPECT_GE(o.instrumental_intensity, 0.5);
      EXPECT_LE(o.instrumental_intensity, 7.0);
      EXPECT_EQ(o.jma_class, intensity_to_jma_class(o.instrumental_intensity));
      EXPECT_TRUE(spec.contains(o.lat_deg, o.lon_deg));
    }
  }
  EXPECT_GT(with_obs, 150u);
  EXPECT_EQ(events[0].event_id, "syn000001");
}

TEST(GenerateCatalog, DeterministicAndSeedSensitive) {
  const GridSpec spec;
  EXPECT_EQ(generate_catalog(30, AttenuationParams{}, 5, spec), generate_catalog(30, AttenuationParams{}, 5, spec));
  EXPECT_NE(generate_catalog(30, AttenuationParams{}, 5, spec), generate_catalog(30, AttenuationParams{}, 6, spec));
  EXPECT_THROW(generate_catalog(0, AttenuationParams{}, 5, spec), ValidationError);
}

TEST(GenerateCatalog, RoundTripsThroughCsv) {
  const auto events = generate_catalog(40, AttenuationParams{}, 11, GridSpec{});
  std::ostringstream e, o;
  write_catalog(events, e, o);
  std::istringstream ei(e.str()), oi(o.str());
  EXPECT_EQ(parse_catalog(ei, oi), events);
}

}  // namespace
}  // namespace seisint
