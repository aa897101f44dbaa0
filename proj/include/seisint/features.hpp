#pragma once

#include <string_view>
#include <vector>

#include "seisint/catalog.hpp"
#include "seisint/geo_grid.hpp"
#include "seisint/nn/tensor.hpp"

namespace seisint {

enum class FeatureSource { kMagnitude, kDepth };

std::string_view feature_source_name(FeatureSource s);
FeatureSource parse_feature_source(std::string_view name);

/// One input channel: (source / scale)^power.
struct PowerTerm {
  FeatureSource source = FeatureSource::kMagnitude;
  int power = 1;

  bool operator==(const PowerTerm&) const = default;
};

struct FeatureConfig {
  int k = 15;
  std::vector<PowerTerm> classifier_orders = {{FeatureSource::kMagnitude, 9},
                                              {FeatureSource::kDepth, 1}};
  std::vector<PowerTerm> regressor_orders = default_regressor_orders();
  double magnitude_scale = 8.0;
  double depth_scale = 700.0;

  /// Magnitude powers 1..14 followed by depth powers 1..14.
  static std::vector<PowerTerm> default_regressor_orders();

  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

/// C x n x n input channels.
using FeatureTensor = nn::Tensor;

/// (value / scale)^power.
double powered_term(double value, int power, double scale);

/// Each channel holds its powered term in every cell of the k x k block
/// centred on the epicentre cell, clipped at the grid edges.
/// Throws OutOfBoundsError when the epicentre lies outside the grid.
FeatureTensor encode_classifier_input(const HypocenterEvent& event, const FeatureConfig& cfg,
                                      const GridSpec& spec);

/// Each channel holds its powered term in the epicentre cell only.
FeatureTensor encode_regressor_input(const HypocenterEvent& event, const FeatureConfig& cfg,
                                     const GridSpec& spec);

}  // namespace seisint
