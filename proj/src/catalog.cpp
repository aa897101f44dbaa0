#include "seisint/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "seisint/error.hpp"
#include "seisint/random.hpp"
#include "seisint/text.hpp"

namespace seisint {

namespace {

constexpr std::array<std::string_view, kJmaClassCount> kClassLabels = {
    "0", "1", "2", "3", "4", "5L", "5U", "6L", "6U", "7"};

constexpr std::string_view kEventsHeader = "event_id,origin_time,lat,lon,depth_km,magnitude";
constexpr std::string_view kObservationsHeader =
    "event_id,station_lat,station_lon,instrumental_intensity,jma_class";

bool is_iso8601(const std::string& s) {
  static const std::regex pattern(
      R"(^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?(Z|[+-]\d{2}(:?\d{2})?)?$)");
  return std::regex_match(s, pattern);
}

// Yields (line number, content) for every non-comment, non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = text::strip_cr(raw);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty() || line.front() == '#') continue;
    fn(line_no, line);
  }
}

class RowReader {
 public:
  RowReader(const std::string& source, std::size_t line, std::string_view row, std::size_t expected)
      : source_(source), line_(line), fields_(text::split(row, ',')) {
    if (fields_.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, got " +
           std::to_string(fields_.size()));
    }
  }

  std::string str(std::size_t i) const {
    std::string_view f = fields_[i];
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    return std::string(f);
  }

  double real(std::size_t i, const char* name) const {
    auto v = text::parse_real(fields_[i]);
    if (!v || !std::isfinite(*v)) fail(std::string("bad ") + name + " '" + std::string(fields_[i]) + "'");
    return *v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

 private:
  const std::string& source_;
  std::size_t line_;
  std::vector<std::string_view> fields_;
};

void check_coordinates(const RowReader& row, double lat, double lon) {
  if (lat < -90.0 || lat > 90.0) row.fail("latitude out of range");
  if (lon < -180.0 || lon > 360.0) row.fail("longitude out of range");
}

}  // namespace

std::size_t IntensityGrid::observed_count() const noexcept {
  return static_cast<std::size_t>(std::count(observed_mask.begin(), observed_mask.end(), 1));
}

JmaClass intensity_to_jma_class(double v) {
  if (std::isnan(v)) throw DomainError("intensity_to_jma_class: NaN intensity");
  if (v < 0.5) return JmaClass::k0;
  if (v < 1.5) return JmaClass::k1;
  if (v < 2.5) return JmaClass::k2;
  if (v < 3.5) return JmaClass::k3;
  if (v < 4.5) return JmaClass::k4;
  if (v < 5.0) return JmaClass::k5Lower;
  if (v < 5.5) return JmaClass::k5Upper;
  if (v < 6.0) return JmaClass::k6Lower;
  if (v < 6.5) return JmaClass::k6Upper;
  return JmaClass::k7;
}

std::string_view jma_class_label(JmaClass c) { return kClassLabels[static_cast<std::size_t>(c)]; }

JmaClass parse_jma_class(std::string_view label) {
  for (std::size_t i = 0; i < kClassLabels.size(); ++i) {
    if (kClassLabels[i] == label) return static_cast<JmaClass>(i);
  }
  throw ValidationError("unknown JMA class '" + std::string(label) + "'");
}

std::vector<HypocenterEvent> parse_catalog(std::istream& events_csv, std::istream& observations_csv,
                                           const std::string& events_name,
                                           const std::string& observations_name) {
  std::vector<HypocenterEvent> events;
  std::unordered_map<std::string, std::size_t> by_id;

  bool header_seen = false;
  for_each_record(events_csv, [&](std::size_t line_no, std::string_view line) {
    if (!header_seen) {
      if (line != kEventsHeader) {
        throw ParseError(events_name, line_no, "expected header '" + std::string(kEventsHeader) + "'");
      }
      header_seen = true;
      return;
    }
    RowReader row(events_name, line_no, line, 6);
    HypocenterEvent ev;
    ev.event_id = row.str(0);
    if (ev.event_id.empty()) row.fail("empty event_id");
    ev.origin_time = row.str(1);
    if (!is_iso8601(ev.origin_time)) row.fail("origin_time is not ISO-8601: '" + ev.origin_time + "'");
    ev.lat_deg = row.real(2, "lat");
    ev.lon_deg = row.real(3, "lon");
    check_coordinates(row, ev.lat_deg, ev.lon_deg);
    ev.depth_km = row.real(4, "depth_km");
    if (ev.depth_km < 0.0) row.fail("negative depth");
    ev.magnitude = row.real(5, "magnitude");
    if (!by_id.emplace(ev.event_id, events.size()).second) {
      row.fail("duplicate event_id '" + ev.event_id + "'");
    }
    events.push_back(std::move(ev));
  });
  if (!header_seen) throw ParseError(events_name, 0, "missing header");

  header_seen = false;
  for_each_record(observations_csv, [&](std::size_t line_no, std::string_view line) {
    if (!header_seen) {
      if (line != kObservationsHeader) {
        throw ParseError(observations_name, line_no,
                         "expected header '" + std::string(kObservationsHeader) + "'");
      }
      header_seen = true;
      return;
    }
    RowReader row(observations_name, line_no, line, 5);
    const std::string id = row.str(0);
    auto it = by_id.find(id);
    if (it == by_id.end()) row.fail("observation references unknown event_id '" + id + "'");
    StationObservation obs;
    obs.lat_deg = row.real(1, "station_lat");
    obs.lon_deg = row.real(2, "station_lon");
    check_coordinates(row, obs.lat_deg, obs.lon_deg);
    obs.instrumental_intensity = row.real(3, "instrumental_intensity");
    if (obs.instrumental_intensity < kCatalogFloor) {
      row.fail("instrumental_intensity " + text::format_real(obs.instrumental_intensity) +
               " below catalog floor 0.5");
    }
    try {
      obs.jma_class = parse_jma_class(row.str(4));
    } catch (const ValidationError& e) {
      row.fail(e.what());
    }
    if (obs.jma_class != intensity_to_jma_class(obs.instrumental_intensity)) {
      row.fail("jma_class " + row.str(4) + " inconsistent with intensity " +
               text::format_real(obs.instrumental_intensity));
    }
    events[it->second].observations.push_back(obs);
  });

  return events;
}

std::vector<HypocenterEvent> load_catalog(const std::filesystem::path& dir) {
  const auto events_path = dir / "events.csv";
  const auto obs_path = dir / "observations.csv";
  std::ifstream events(events_path, std::ios::binary);
  if (!events) throw ValidationError("cannot open " + events_path.string());
  std::ifstream obs(obs_path, std::ios::binary);
  if (!obs) throw ValidationError("cannot open " + obs_path.string());
  return parse_catalog(events, obs, events_path.string(), obs_path.string());
}

void write_catalog(std::span<const HypocenterEvent> events, std::ostream& events_csv,
                   std::ostream& observations_csv) {
  using text::format_real;
  events_csv << kEventsHeader << '\n';
  observations_csv << kObservationsHeader << '\n';
  for (const auto& ev : events) {
    events_csv << ev.event_id << ',' << ev.origin_time << ',' << format_real(ev.lat_deg) << ','
               << format_real(ev.lon_deg) << ',' << format_real(ev.depth_km) << ','
               << format_real(ev.magnitude) << '\n';
    for (const auto& o : ev.observations) {
      observations_csv << ev.event_id << ',' << format_real(o.lat_deg) << ','
                       << format_real(o.lon_deg) << ',' << format_real(o.instrumental_intensity)
                       << ',' << jma_class_label(o.jma_class) << '\n';
    }
  }
}

IntensityGrid rasterize(const HypocenterEvent& event, const GridSpec& spec) {
  IntensityGrid grid(spec.n_cells);
  for (const auto& obs : event.observations) {
    auto cell = cell_of(obs.lat_deg, obs.lon_deg, spec);
    if (!cell) continue;
    const std::size_t i = cell->flat(spec.n_cells);
    if (!grid.observed_mask[i] || obs.instrumental_intensity > grid.values[i]) {
      grid.values[i] = obs.instrumental_intensity;
    }
    grid.observed_mask[i] = 1;
  }
  return grid;
}

DatasetSplit split_dataset(std::span<const HypocenterEvent> events, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must lie in (0, 1)");
  }
  const std::size_t n = events.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw ValidationError("split: " + std::to_string(n) + " events with fraction " +
                          text::format_real(train_fraction) + " leaves one side empty");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  random::Engine rng(seed);
  random::fisher_yates(std::span<std::size_t>(order), rng);

  DatasetSplit split;
  split.train.reserve(n_train);
  split.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? split.train : split.test).push_back(events[order[i]]);
  }
  return split;
}

std::vector<HypocenterEvent> filter_min_magnitude(std::span<const HypocenterEvent> events,
                                                  double min_magnitude) {
  std::vector<HypocenterEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const HypocenterEvent& e) { return e.magnitude >= min_magnitude; });
  return out;
}

}  // namespace seisint
