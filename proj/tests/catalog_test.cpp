#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "seisint/catalog.hpp"
#include "seisint/error.hpp"
#include "test_support.hpp"

namespace seisint {
namespace {

using testing::make_event;
using testing::station;

constexpr const char* kEvents =
    "event_id,origin_time,lat,lon,depth_km,magnitude\n"
    "e1,2003-09-26T04:50:07,41.78,144.08,42,8.0\n"
    "# comment line\n"
    "\n"
    "e2,2011-03-11T14:46:18+09:00,38.10,142.86,24,9.0\n";

constexpr const char* kObs =
    "event_id,station_lat,station_lon,instrumental_intensity,jma_class\n"
    "e1,42.9,143.2,5.8,6L\n"
    "e1,43.0,144.3,4.4,4\n"
    "e2,38.7,141.0,6.6,7\n";

std::vector<HypocenterEvent> parse(const std::string& events, const std::string& obs) {
  std::istringstream e(events), o(obs);
  return parse_catalog(e, o);
}

std::size_t parse_error_line(const std::string& events, const std::string& obs) {
  try {
    parse(events, obs);
  } catch (const ParseError& err) {
    return err.line();
  }
  ADD_FAILURE() << "expected ParseError";
  return 0;
}

TEST(JmaClass, BinEdges) {
  EXPECT_EQ(intensity_to_jma_class(0.49), JmaClass::k0);
  EXPECT_EQ(intensity_to_jma_class(0.5), JmaClass::k1);
  EXPECT_EQ(intensity_to_jma_class(1.49), JmaClass::k1);
  EXPECT_EQ(intensity_to_jma_class(1.5), JmaClass::k2);
  EXPECT_EQ(intensity_to_jma_class(3.5), JmaClass::k4);
  EXPECT_EQ(intensity_to_jma_class(4.5), JmaClass::k5Lower);
  EXPECT_EQ(intensity_to_jma_class(4.99), JmaClass::k5Lower);
  EXPECT_EQ(intensity_to_jma_class(5.0), JmaClass::k5Upper);
  EXPECT_EQ(intensity_to_jma_class(5.5), JmaClass::k6Lower);
  EXPECT_EQ(intensity_to_jma_class(6.0), JmaClass::k6Upper);
  EXPECT_EQ(intensity_to_jma_class(6.5), JmaClass::k7);
  EXPECT_EQ(intensity_to_jma_class(9.0), JmaClass::k7);
  EXPECT_EQ(intensity_to_jma_class(-1.0), JmaClass::k0);
  EXPECT_THROW(intensity_to_jma_class(std::nan("")), DomainError);
}

TEST(JmaClass, LabelsRoundTrip) {
  for (std::size_t i = 0; i < kJmaClassCount; ++i) {
    const auto c = static_cast<JmaClass>(i);
    EXPECT_EQ(parse_jma_class(jma_class_label(c)), c);
  }
  EXPECT_EQ(jma_class_label(JmaClass::k5Lower), "5L");
  EXPECT_EQ(jma_class_label(JmaClass::k6Upper), "6U");
  EXPECT_THROW(parse_jma_class("5-"), Error);
}

TEST(ParseCatalog, JoinsObservations) {
  const auto events = parse(kEvents, kObs);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].event_id, "e1");
  EXPECT_EQ(events[0].origin_time, "2003-09-26T04:50:07");
  EXPECT_DOUBLE_EQ(events[0].lat_deg, 41.78);
  EXPECT_DOUBLE_EQ(events[0].magnitude, 8.0);
  ASSERT_EQ(events[0].observations.size(), 2u);
  EXPECT_DOUBLE_EQ(events[0].observations[1].instrumental_intensity, 4.4);
  EXPECT_EQ(events[0].observations[0].jma_class, JmaClass::k6Lower);
  ASSERT_EQ(events[1].observations.size(), 1u);
  EXPECT_EQ(events[1].observations[0].jma_class, JmaClass::k7);
}

TEST(ParseCatalog, AcceptsCrlfAndBom) {
  std::string events = std::string("\xEF\xBB\xBF") + kEvents;
  std::string crlf;
  for (char ch : events) {
    if (ch == '\n') crlf += '\r';
    crlf += ch;
  }
  const auto parsed = parse(crlf, kObs);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_DOUBLE_EQ(parsed[1].magnitude, 9.0);
}

TEST(ParseCatalog, EventWithoutObservationsIsKept) {
  const auto events =
      parse(kEvents, "event_id,station_lat,station_lon,instrumental_intensity,jma_class\n");
  ASSERT_EQ(events.size(), 2u);
  EXPECT_TRUE(events[0].observations.empty());
}

TEST(ParseCatalog, ErrorsCarryLineNumbers) {
  const std::string header = "event_id,origin_time,lat,lon,depth_km,magnitude\n";
  const std::string obs_header = "event_id,station_lat,station_lon,instrumental_intensity,jma_class\n";
  // wrong field count
  EXPECT_EQ(parse_error_line(header + "e1,2003-09-26T04:50:07,41,144,42\n", obs_header), 2u);
  // bad timestamp
  EXPECT_EQ(parse_error_line(header + "e1,yesterday,41,144,42,7\n", obs_header), 2u);
  // latitude out of range
  EXPECT_EQ(parse_error_line(header + "e1,2003-09-26T04:50:07,95,144,42,7\n", obs_header), 2u);
  // negative depth
  EXPECT_EQ(parse_error_line(header + "e1,2003-09-26T04:50:07,41,144,-1,7\n", obs_header), 2u);
  // non-numeric magnitude
  EXPECT_EQ(parse_error_line(header + "e1,2003-09-26T04:50:07,41,144,10,big\n", obs_header), 2u);
  // duplicate id
  EXPECT_EQ(parse_error_line(header + "e1,2003-09-26T04:50:07,41,144,10,7\n"
                                      "e1,2003-09-26T04:50:07,41,144,10,7\n",
                             obs_header),
            3u);
  // wrong header
  EXPECT_EQ(parse_error_line("id,time,lat,lon,depth,mag\n", obs_header), 1u);
}

TEST(ParseCatalog, ObservationErrors) {
  const std::string obs_header = "event_id,station_lat,station_lon,instrumental_intensity,jma_class\n";
  EXPECT_EQ(parse_error_line(kEvents, obs_header + "e9,42.9,143.2,5.8,6L\n"), 2u);
  EXPECT_EQ(parse_error_line(kEvents, obs_header + "e1,42.9,143.2,0.3,0\n"), 2u);
  EXPECT_EQ(parse_error_line(kEvents, obs_header + "e1,42.9,143.2,6.1,4\n"), 2u);
  EXPECT_EQ(parse_error_line(kEvents, obs_header + "e1,42.9,143.2,5.8,6L\ne1,42.9,143.2,x,6L\n"), 3u);
}

TEST(ParseCatalog, MessageNamesSource) {
  std::istringstream e("nonsense\n"), o("");
  try {
    parse_catalog(e, o, "/data/events.csv", "/data/observations.csv");
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_NE(std::string(err.what()).find("/data/events.csv:1"), std::string::npos);
  }
}

TEST(WriteCatalog, RoundTrips) {
  auto events = parse(kEvents, kObs);
  events[0].observations[0].instrumental_intensity = 0.7 + 0.2;  // needs 16 significant digits
  events[0].observations[0].jma_class = JmaClass::k1;
  std::ostringstream e, o;
  write_catalog(events, e, o);
  EXPECT_EQ(parse(e.str(), o.str()), events);
}

TEST(LoadCatalog, NamesMissingFile) {
  testing::TempDir dir("catalog");
  testing::write_file(dir / "events.csv", kEvents);
  try {
    load_catalog(dir.path());
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("observations.csv"), std::string::npos);
  }
}

TEST(Rasterize, MaxAggregatesAndMasks) {
  const GridSpec spec;
  const auto ev = make_event("a", 38, 137, 10, 6,
                             {station(38.0, 137.0, 2.0), station(38.0, 137.05, 3.5),
                              station(45.9, 128.1, 0.7), station(50.0, 137.0, 4.0)});
  const auto g = rasterize(ev, spec);
  ASSERT_EQ(g.size(), 4096u);
  EXPECT_EQ(g.observed_count(), 2u);
  const auto c = cell_of(38.0, 137.0, spec)->flat(64);
  EXPECT_EQ(cell_of(38.0, 137.05, spec)->flat(64), c);
  EXPECT_EQ(g.values[c], 3.5);
  EXPECT_EQ(g.observed_mask[c], 1);
  EXPECT_EQ(g.values[0], 0.7);
  double total = 0.0;
  for (double v : g.values) total += v;
  EXPECT_DOUBLE_EQ(total, 4.2);
}

std::vector<HypocenterEvent> numbered(std::size_t n) {
  std::vector<HypocenterEvent> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_event(std::to_string(i), 38, 137, 10, 6));
  return out;
}

// Permutation from an independent mt19937-64 implementation driving the same
// Fisher-Yates walk.
TEST(SplitDataset, MatchesReferenceShuffle) {
  const auto events = numbered(10);
  const auto split = split_dataset(events, 0.8, 7);
  const std::vector<std::string> train{"0", "7", "4", "9", "3", "1", "2", "8"};
  const std::vector<std::string> test{"6", "5"};
  ASSERT_EQ(split.train.size(), 8u);
  ASSERT_EQ(split.test.size(), 2u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(split.train[i].event_id, train[i]);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(split.test[i].event_id, test[i]);
}

TEST(SplitDataset, DefaultProportions) {
  const auto split = split_dataset(numbered(1819), 1461.0 / 1819.0, 1819);
  EXPECT_EQ(split.train.size(), 1461u);
  EXPECT_EQ(split.test.size(), 358u);
}

TEST(SplitDataset, PartitionsAndIsSeedStable) {
  const auto events = numbered(57);
  const auto a = split_dataset(events, 0.3, 99);
  const auto b = split_dataset(events, 0.3, 99);
  EXPECT_EQ(a.train, b.train);
  std::vector<int> seen(57, 0);
  for (const auto& e : a.train) ++seen[std::stoul(e.event_id)];
  for (const auto& e : a.test) ++seen[std::stoul(e.event_id)];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_NE(split_dataset(events, 0.3, 100).train, a.train);
}

TEST(SplitDataset, RejectsDegenerate) {
  EXPECT_THROW(split_dataset(numbered(2), 0.1, 1), ValidationError);
  EXPECT_THROW(split_dataset(numbered(2), 0.9, 1), ValidationError);
  EXPECT_THROW(split_dataset(numbered(5), 1.5, 1), ValidationError);
}

TEST(FilterMinMagnitude, KeepsThreshold) {
  std::vector<HypocenterEvent> events{make_event("a", 38, 137, 10, 4.9), make_event("b", 38, 137, 10, 5.0),
                                      make_event("c", 38, 137, 10, 7.0)};
  const auto kept = filter_min_magnitude(events, 5.0);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].event_id, "b");
}

}  // namespace
}  // namespace seisint
