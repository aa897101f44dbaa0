#include "seisint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "seisint/error.hpp"

namespace seisint {

namespace {

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": list lengths differ");
}

}  // namespace

IntensityStats mse_and_r(std::span<const Grid> predictions, std::span<const IntensityGrid> observed) {
  require_aligned(predictions.size(), observed.size(), "mse_and_r");
  std::vector<double> p, o;
  for (std::size_t e = 0; e < predictions.size(); ++e) {
    const auto& pred = predictions[e];
    const auto& obs = observed[e];
    if (pred.size() != obs.size()) throw ShapeError("mse_and_r: grid sizes differ");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs.observed_mask[i] && obs.values[i] >= kCatalogFloor) {
        p.push_back(pred.values[i]);
        o.push_back(obs.values[i]);
      }
    }
  }
  const std::size_t n = p.size();
  if (n < 2) throw UndefinedCorrelationError("mse_and_r: fewer than two intensity cells");

  double mean_p = 0.0, mean_o = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_p += p[i];
    mean_o += o[i];
    sq += (p[i] - o[i]) * (p[i] - o[i]);
  }
  mean_p /= static_cast<double>(n);
  mean_o /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = p[i] - mean_p, dob = o[i] - mean_o;
    sxy += dp * dob;
    sxx += dp * dp;
    syy += dob * dob;
  }
  if (syy == 0.0) throw UndefinedCorrelationError("mse_and_r: observed intensities have zero variance");

  IntensityStats s;
  s.n = n;
  s.mse = sq / static_cast<double>(n);
  s.pearson_r = sxx == 0.0 ? 0.0 : std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return s;
}

FeltScore f_score_felt(std::span<const Grid> predictions, std::span<const IntensityGrid> observed,
                       std::span<const std::vector<std::uint8_t>> station_masks,
                       double felt_threshold) {
  require_aligned(predictions.size(), observed.size(), "f_score_felt");
  require_aligned(predictions.size(), station_masks.size(), "f_score_felt");
  std::size_t tp = 0, fp = 0, fn = 0, n = 0;
  for (std::size_t e = 0; e < predictions.size(); ++e) {
    const auto& pred = predictions[e];
    const auto& obs = observed[e];
    const auto& mask = station_masks[e];
    if (pred.size() != obs.size() || mask.size() != obs.size()) {
      throw ShapeError("f_score_felt: grid sizes differ");
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (!mask[i]) continue;
      ++n;
      const bool predicted = pred.values[i] >= felt_threshold;
      const bool actual = obs.observed_mask[i] && obs.values[i] >= kCatalogFloor;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
  }
  if (n == 0) throw ValidationError("f_score_felt: no station cells");

  FeltScore s;
  s.n = n;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f_score = s.precision + s.recall > 0.0
                  ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                  : 0.0;
  return s;
}

EvalReport evaluate(std::span<const Grid> predictions, std::span<const IntensityGrid> observed,
                    double felt_threshold) {
  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(observed.size());
  for (const auto& g : observed) masks.push_back(g.observed_mask);
  const auto intensity = mse_and_r(predictions, observed);
  const auto felt = f_score_felt(predictions, observed, masks, felt_threshold);
  EvalReport r;
  r.mse = intensity.mse;
  r.pearson_r = intensity.pearson_r;
  r.n_intensity_cells = intensity.n;
  r.f_score = felt.f_score;
  r.precision = felt.precision;
  r.recall = felt.recall;
  r.n_station_cells = felt.n;
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::json j = {{"mse", r.mse},
                      {"pearson_r", r.pearson_r},
                      {"f_score", r.f_score},
                      {"precision", r.precision},
                      {"recall", r.recall},
                      {"n_intensity_cells", r.n_intensity_cells},
                      {"n_station_cells", r.n_station_cells}};
  return j.dump();
}

std::string report_summary(std::string_view label, const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28.*s MSE %.3f  r %.3f  F %.3f  (P %.3f R %.3f; %zu/%zu cells)",
                static_cast<int>(label.size()), label.data(), r.mse, r.pearson_r, r.f_score,
                r.precision, r.recall, r.n_intensity_cells, r.n_station_cells);
  return buf;
}

}  // namespace seisint
