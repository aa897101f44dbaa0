#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "seisint/catalog.hpp"
#include "seisint/nn/tensor.hpp"

namespace seisint::nn {

inline constexpr double kBceClamp = 1e-7;

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad;  // d(loss)/d(prediction), same shape as the prediction
};

/// Mean of (pred - value)^2 over observed cells only. Unobserved cells get a
/// zero gradient and never touch the loss, whatever their target value.
template <typename T>
LossResult<T> masked_mse_loss(const BasicTensor<T>& pred, const IntensityGrid& target) {
  if (pred.size() != target.size()) {
    throw ShapeError("masked_mse_loss: prediction has " + std::to_string(pred.size()) +
                     " cells, target " + std::to_string(target.size()));
  }
  LossResult<T> r{0.0, BasicTensor<T>(pred.shape())};
  const std::size_t n_obs = target.observed_count();
  if (n_obs == 0) return r;
  const double inv = 1.0 / static_cast<double>(n_obs);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!target.observed_mask[i]) continue;
    const double d = static_cast<double>(pred[i]) - target.values[i];
    sum += d * d;
    r.grad[i] = static_cast<T>(2.0 * d * inv);
  }
  r.loss = sum * inv;
  return r;
}

/// Mean binary cross-entropy over every cell. Probabilities are clamped to
/// [1e-7, 1 - 1e-7]; the gradient is zero where the clamp is active.
template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& pred_prob, const BasicTensor<T>& target_binary) {
  require_shape(target_binary, pred_prob.shape(), "bce_loss target");
  LossResult<T> r{0.0, BasicTensor<T>(pred_prob.shape())};
  const std::size_t n = pred_prob.size();
  if (n == 0) return r;
  const double inv = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = static_cast<double>(pred_prob[i]);
    const double p = std::clamp(raw, kBceClamp, 1.0 - kBceClamp);
    const double t = static_cast<double>(target_binary[i]);
    sum -= t * std::log(p) + (1.0 - t) * std::log1p(-p);
    if (raw == p) r.grad[i] = static_cast<T>((-(t / p) + (1.0 - t) / (1.0 - p)) * inv);
  }
  r.loss = sum * inv;
  return r;
}

}  // namespace seisint::nn
