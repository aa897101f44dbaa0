#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "seisint/nn/parallel.hpp"
#include "seisint/nn/tensor.hpp"

namespace seisint::nn {

/// Adam moments for a fixed list of parameter tensors. Accumulators are
/// sized on the first step.
template <typename T>
struct OptimizerState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  std::vector<BasicTensor<T>> first_moment;
  std::vector<BasicTensor<T>> second_moment;
};

namespace detail {

template <typename T>
void adam_update(BasicTensor<T>& param, BasicTensor<T>& grad, BasicTensor<T>& m, BasicTensor<T>& v,
                 const OptimizerState<T>& s, const Executor& exec) {
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step_count));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step_count));
  const T b1 = static_cast<T>(s.beta1), b2 = static_cast<T>(s.beta2);
  const T one_b1 = static_cast<T>(1.0 - s.beta1), one_b2 = static_cast<T>(1.0 - s.beta2);
  const T step = static_cast<T>(s.learning_rate / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(s.epsilon);
  T* p = param.data();
  T* g = grad.data();
  T* mm = m.data();
  T* vv = v.data();
  exec.parallel_for(param.size(), [=](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const T gi = g[i];
      mm[i] = b1 * mm[i] + one_b1 * gi;
      vv[i] = b2 * vv[i] + one_b2 * gi * gi;
      p[i] -= step * mm[i] / (std::sqrt(vv[i]) * inv_sqrt_bc2 + eps);
      g[i] = T{};
    }
  });
}

}  // namespace detail

/// One bias-corrected Adam step over every tensor of `params`, then zeroes
/// the gradients.
template <typename T>
void optimizer_step(std::span<LayerParams<T>* const> params, OptimizerState<T>& state,
                    const Executor& exec = Executor()) {
  const std::size_t n_tensors = 2 * params.size();
  if (state.first_moment.empty()) {
    for (auto* lp : params) {
      state.first_moment.emplace_back(lp->weights.shape());
      state.first_moment.emplace_back(lp->bias.shape());
      state.second_moment.emplace_back(lp->weights.shape());
      state.second_moment.emplace_back(lp->bias.shape());
    }
  }
  if (state.first_moment.size() != n_tensors || state.second_moment.size() != n_tensors) {
    throw ShapeError("optimizer_step: state tracks a different parameter list");
  }
  ++state.step_count;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& lp = *params[i];
    if (!lp.has_gradients()) throw ShapeError("optimizer_step: gradients of " + lp.name + " not allocated");
    require_shape(state.first_moment[2 * i], lp.weights.shape(), "optimizer moment");
    require_shape(state.first_moment[2 * i + 1], lp.bias.shape(), "optimizer moment");
    detail::adam_update(lp.weights, lp.weight_grad, state.first_moment[2 * i],
                        state.second_moment[2 * i], state, exec);
    detail::adam_update(lp.bias, lp.bias_grad, state.first_moment[2 * i + 1],
                        state.second_moment[2 * i + 1], state, exec);
  }
}

}  // namespace seisint::nn
