#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seisint/error.hpp"
#include "seisint/geo_grid.hpp"

namespace seisint {
namespace {

// Reference values from a 30-digit evaluation of ln(tan(pi/4 + phi/2)).
TEST(Mercator, KnownOrdinates) {
  EXPECT_NEAR(mercator_y(30.0), 0.549306144334055, 1e-12);
  EXPECT_NEAR(mercator_y(46.0), 0.906275487694346, 1e-12);
  EXPECT_NEAR(mercator_y(0.0), 0.0, 1e-15);
}

TEST(Mercator, OddAndInvertible) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-89.0, 89.0);
  for (int i = 0; i < 1000; ++i) {
    const double phi = lat(rng);
    EXPECT_NEAR(mercator_y(-phi), -mercator_y(phi), 1e-12);
    EXPECT_NEAR(inverse_mercator_y(mercator_y(phi)), phi, 1e-9);
  }
}

TEST(Mercator, RejectsPoles) {
  EXPECT_THROW(mercator_y(90.0), DomainError);
  EXPECT_THROW(mercator_y(-90.0), DomainError);
  EXPECT_THROW(mercator_y(120.0), DomainError);
  EXPECT_THROW(mercator_y(std::nan("")), DomainError);
}

TEST(CellOf, InteriorPoint) {
  const GridSpec spec;
  const auto c = cell_of(38.0, 137.0, spec);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->row, 33u);
  EXPECT_EQ(c->col, 32u);
}

TEST(CellOf, Corners) {
  const GridSpec spec;
  EXPECT_EQ(*cell_of(46.0, 128.0, spec), (CellIndex{0, 0}));
  EXPECT_EQ(*cell_of(30.0, 146.0, spec), (CellIndex{63, 63}));
  EXPECT_EQ(*cell_of(30.0, 128.0, spec), (CellIndex{63, 0}));
  EXPECT_EQ(*cell_of(46.0, 146.0, spec), (CellIndex{0, 63}));
}

TEST(CellOf, OutsideIsEmpty) {
  const GridSpec spec;
  EXPECT_FALSE(cell_of(50.0, 140.0, spec));
  EXPECT_FALSE(cell_of(29.999, 140.0, spec));
  EXPECT_FALSE(cell_of(40.0, 127.9, spec));
  EXPECT_FALSE(cell_of(40.0, 146.1, spec));
}

TEST(CellOf, RowsAreUniformInMercatorNotLatitude) {
  const GridSpec spec;
  // Lower edge of row 0 sits at inverse Mercator of y_max - dy.
  const double edge = 45.7775587655657;
  EXPECT_EQ(cell_of(edge + 1e-6, 137.0, spec)->row, 0u);
  EXPECT_EQ(cell_of(edge - 1e-6, 137.0, spec)->row, 1u);
  // A latitude-uniform grid would put the edge at 46 - 16/64 = 45.75.
  EXPECT_EQ(cell_of(45.76, 137.0, spec)->row, 1u);
}

TEST(CellCenter, FirstCell) {
  const GridSpec spec;
  const auto c = cell_center({0, 0}, spec);
  EXPECT_NEAR(c.lat_deg, 45.8888907339862, 1e-10);
  EXPECT_NEAR(c.lon_deg, 128.140625, 1e-12);
}

TEST(CellCenter, RoundTripsEveryCell) {
  const GridSpec spec;
  for (std::size_t r = 0; r < spec.n_cells; ++r) {
    for (std::size_t c = 0; c < spec.n_cells; ++c) {
      const auto center = cell_center({r, c}, spec);
      const auto back = cell_of(center.lat_deg, center.lon_deg, spec);
      ASSERT_TRUE(back);
      EXPECT_EQ(*back, (CellIndex{r, c}));
    }
  }
}

TEST(GridSpec, Validation) {
  GridSpec bad;
  bad.lat_min_deg = 50.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = GridSpec{};
  bad.n_cells = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = GridSpec{};
  bad.lon_max_deg = bad.lon_min_deg;
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_NO_THROW(GridSpec{}.validate());
  EXPECT_EQ(GridSpec{}.cell_count(), 4096u);
}

TEST(CellIndex, FlatIsRowMajor) { EXPECT_EQ((CellIndex{2, 5}).flat(64), 133u); }

}  // namespace
}  // namespace seisint
