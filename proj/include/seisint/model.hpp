#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seisint/catalog.hpp"
#include "seisint/features.hpp"
#include "seisint/geo_grid.hpp"
#include "seisint/nn/parallel.hpp"
#include "seisint/nn/tensor.hpp"

namespace seisint {

struct ModelConfig {
  std::size_t conv_filters = 4;
  std::size_t conv_kernel = 125;

  void validate(const GridSpec& spec) const;
  bool operator==(const ModelConfig&) const = default;
};

struct HybridConfig {
  double alpha = 0.30;
  /// Classifier probability at or above which a cell counts as felt.
  double felt_threshold = 0.5;

  void validate() const;
  bool operator==(const HybridConfig&) const = default;
};

struct TrainingSchedule {
  std::size_t epochs = 50;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 20240101;

  void validate() const;
  bool operator==(const TrainingSchedule&) const = default;
};

/// Real-valued n x n field (predictions, probabilities, binary labels).
struct Grid {
  std::size_t n_cells = 0;
  std::vector<double> values;

  explicit Grid(std::size_t n = 0, double fill = 0.0) : n_cells(n), values(n * n, fill) {}
  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const Grid&) const = default;
};

/// One dense layer from the flattened classifier features to n*n logits.
template <typename T>
struct ClassifierModel {
  nn::LayerParams<T> dense;
};

/// Conv (F filters, kernel K, same-size padding) -> relu -> dense to n*n.
template <typename T>
struct RegressorModel {
  nn::LayerParams<T> conv;
  nn::LayerParams<T> dense;

  std::size_t padding() const { return (conv.weights.extent(2) - 1) / 2; }
};

/// Glorot-uniform weights, zero biases.
template <typename T>
ClassifierModel<T> make_classifier(const FeatureConfig& features, const GridSpec& spec,
                                   std::uint64_t seed);
template <typename T>
RegressorModel<T> make_regressor(const FeatureConfig& features, const ModelConfig& model,
                                 const GridSpec& spec, std::uint64_t seed);

/// sigmoid(dense(classifier features)), as an n x n probability grid.
Grid classifier_predict(const HypocenterEvent& event, const ClassifierModel<float>& model,
                        const FeatureConfig& features, const GridSpec& spec,
                        const nn::Executor& exec = nn::Executor());

/// 1 where prob >= threshold, else 0.
Grid binarize_felt(const Grid& prob, double threshold);

/// dense(relu(conv(regressor features))), as an n x n intensity grid.
Grid regressor_predict(const HypocenterEvent& event, const RegressorModel<float>& model,
                       const FeatureConfig& features, const GridSpec& spec,
                       const nn::Executor& exec = nn::Executor());

/// y = yr - alpha * (1 - yc) for a binary yc.
inline double hybrid_combine(double regressed, double felt, double alpha) {
  return regressed - alpha * (1.0 - felt);
}

Grid hybrid_combine(const Grid& regressed, const Grid& felt, double alpha);

Grid hybrid_predict(const HypocenterEvent& event, const RegressorModel<float>& regressor,
                    const ClassifierModel<float>& classifier, const HybridConfig& hybrid,
                    const FeatureConfig& features, const GridSpec& spec,
                    const nn::Executor& exec = nn::Executor());

/// Classifier label: 1 at observed cells with intensity >= 0.5, 0 elsewhere
/// (unobserved cells included).
nn::Tensor felt_labels(const IntensityGrid& grid);

// ---------------------------------------------------------------------------
// Training

/// Mean loss over `events` at the current parameters. When `accumulate` is
/// set, adds d(loss)/d(params) into the (allocated) gradient tensors.
template <typename T>
double classifier_objective(ClassifierModel<T>& model, std::span<const HypocenterEvent> events,
                            const FeatureConfig& features, const GridSpec& spec, bool accumulate,
                            const nn::Executor& exec = nn::Executor());

template <typename T>
double regressor_objective(RegressorModel<T>& model, std::span<const HypocenterEvent> events,
                           const FeatureConfig& features, const GridSpec& spec, bool accumulate,
                           const nn::Executor& exec = nn::Executor());

struct TrainHistory {
  std::vector<double> epoch_losses;  // mean batch loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Adam on the batch-mean BCE against felt_labels. Throws ValidationError on
/// an empty training set.
TrainHistory train_classifier(std::span<const HypocenterEvent> events, ClassifierModel<float>& model,
                              const FeatureConfig& features, const GridSpec& spec,
                              const TrainingSchedule& schedule,
                              const nn::Executor& exec = nn::Executor(),
                              const EpochCallback& on_epoch = {});

/// Adam on the batch-mean masked MSE. Throws ValidationError when no event
/// has an observed cell.
TrainHistory train_regressor(std::span<const HypocenterEvent> events, RegressorModel<float>& model,
                             const FeatureConfig& features, const GridSpec& spec,
                             const TrainingSchedule& schedule,
                             const nn::Executor& exec = nn::Executor(),
                             const EpochCallback& on_epoch = {});

}  // namespace seisint
