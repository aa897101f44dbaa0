#include "seisint/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seisint/error.hpp"
#include "seisint/text.hpp"

namespace seisint {

namespace {

CellIndex epicenter_cell(const HypocenterEvent& event, const GridSpec& spec) {
  auto cell = cell_of(event.lat_deg, event.lon_deg, spec);
  if (!cell) {
    throw OutOfBoundsError("event '" + event.event_id + "': epicenter (" +
                           text::format_real(event.lat_deg) + ", " +
                           text::format_real(event.lon_deg) + ") outside the grid");
  }
  return *cell;
}

double term_value(const HypocenterEvent& event, const PowerTerm& term, const FeatureConfig& cfg) {
  return term.source == FeatureSource::kMagnitude
             ? powered_term(event.magnitude, term.power, cfg.magnitude_scale)
             : powered_term(event.depth_km, term.power, cfg.depth_scale);
}

}  // namespace

std::string_view feature_source_name(FeatureSource s) {
  return s == FeatureSource::kMagnitude ? "magnitude" : "depth";
}

FeatureSource parse_feature_source(std::string_view name) {
  if (name == "magnitude") return FeatureSource::kMagnitude;
  if (name == "depth") return FeatureSource::kDepth;
  throw ValidationError("unknown feature source '" + std::string(name) + "'");
}

std::vector<PowerTerm> FeatureConfig::default_regressor_orders() {
  std::vector<PowerTerm> orders;
  for (int p = 1; p <= 14; ++p) orders.push_back({FeatureSource::kMagnitude, p});
  for (int p = 1; p <= 14; ++p) orders.push_back({FeatureSource::kDepth, p});
  return orders;
}

void FeatureConfig::validate() const {
  if (k < 1 || k % 2 == 0) throw ValidationError("features: k must be odd and >= 1");
  if (classifier_orders.empty() || regressor_orders.empty()) {
    throw ValidationError("features: order lists must be nonempty");
  }
  auto bad_power = [](const PowerTerm& t) { return t.power < 1; };
  if (std::ranges::any_of(classifier_orders, bad_power) ||
      std::ranges::any_of(regressor_orders, bad_power)) {
    throw ValidationError("features: powers must be >= 1");
  }
  if (!(magnitude_scale > 0.0) || !(depth_scale > 0.0)) {
    throw ValidationError("features: scales must be > 0");
  }
}

double powered_term(double value, int power, double scale) {
  return std::pow(value / scale, power);
}

FeatureTensor encode_classifier_input(const HypocenterEvent& event, const FeatureConfig& cfg,
                                      const GridSpec& spec) {
  const CellIndex center = epicenter_cell(event, spec);
  const std::size_t n = spec.n_cells;
  const std::size_t half = static_cast<std::size_t>(cfg.k / 2);
  const std::size_t r0 = center.row >= half ? center.row - half : 0;
  const std::size_t c0 = center.col >= half ? center.col - half : 0;
  const std::size_t r1 = std::min(n, center.row + half + 1);
  const std::size_t c1 = std::min(n, center.col + half + 1);

  FeatureTensor t({cfg.classifier_orders.size(), n, n});
  for (std::size_t ch = 0; ch < cfg.classifier_orders.size(); ++ch) {
    const auto v = static_cast<float>(term_value(event, cfg.classifier_orders[ch], cfg));
    for (std::size_t r = r0; r < r1; ++r)
      for (std::size_t c = c0; c < c1; ++c) t.at(ch, r, c) = v;
  }
  return t;
}

FeatureTensor encode_regressor_input(const HypocenterEvent& event, const FeatureConfig& cfg,
                                     const GridSpec& spec) {
  const CellIndex center = epicenter_cell(event, spec);
  const std::size_t n = spec.n_cells;
  FeatureTensor t({cfg.regressor_orders.size(), n, n});
  for (std::size_t ch = 0; ch < cfg.regressor_orders.size(); ++ch) {
    t.at(ch, center.row, center.col) =
        static_cast<float>(term_value(event, cfg.regressor_orders[ch], cfg));
  }
  return t;
}

}  // namespace seisint
