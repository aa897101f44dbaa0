#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "seisint/nn/tensor.hpp"

namespace seisint::nn {

struct GradientCheckOptions {
  double step = 1e-3;
  /// Coordinates to check in total, spread evenly over the parameter tensors.
  /// Tensors smaller than their share are checked exhaustively.
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  /// Denominator floor of the relative error.
  double abs_floor = 1e-8;
  /// Coordinates whose one-sided slopes disagree by more than this fraction
  /// straddle a kink (e.g. relu at 0) and are redrawn instead of compared.
  double kink_tolerance = 0.05;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares the gradients already stored in `params` against central finite
/// differences of `loss`. `loss` must evaluate the objective at the current
/// parameter values without touching the stored gradients.
template <typename T>
GradientCheckResult gradient_check(const std::function<double()>& loss,
                                   std::span<LayerParams<T>* const> params,
                                   const GradientCheckOptions& opt = {}) {
  struct Slot {
    BasicTensor<T>* value;
    const BasicTensor<T>* grad;
  };
  std::vector<Slot> slots;
  for (auto* lp : params) {
    if (!lp->has_gradients()) throw ShapeError("gradient_check: " + lp->name + " has no gradients");
    slots.push_back({&lp->weights, &lp->weight_grad});
    slots.push_back({&lp->bias, &lp->bias_grad});
  }
  std::erase_if(slots, [](const Slot& s) { return s.value->empty(); });

  GradientCheckResult result;
  if (slots.empty()) return result;
  const double f0 = loss();
  std::mt19937_64 rng(opt.seed);
  const std::size_t share = std::max<std::size_t>(1, (opt.samples + slots.size() - 1) / slots.size());

  auto check = [&](const Slot& s, std::size_t i) {
    T& x = (*s.value)[i];
    const T original = x;
    x = static_cast<T>(static_cast<double>(original) + opt.step);
    const double up = static_cast<double>(x) - static_cast<double>(original);
    const double f_plus = loss();
    x = static_cast<T>(static_cast<double>(original) - opt.step);
    const double down = static_cast<double>(original) - static_cast<double>(x);
    const double f_minus = loss();
    x = original;

    const double slope_plus = (f_plus - f0) / up;
    const double slope_minus = (f0 - f_minus) / down;
    const double scale = std::max(std::abs(slope_plus), std::abs(slope_minus));
    if (scale > opt.abs_floor && std::abs(slope_plus - slope_minus) > opt.kink_tolerance * scale) {
      ++result.skipped_kinks;
      return false;
    }
    const double numeric = (f_plus - f_minus) / (up + down);
    const double analytic = static_cast<double>((*s.grad)[i]);
    result.max_relative_error =
        std::max(result.max_relative_error, relative_error(analytic, numeric, opt.abs_floor));
    ++result.checked;
    return true;
  };

  for (const auto& s : slots) {
    const std::size_t n = s.value->size();
    if (n <= share) {
      for (std::size_t i = 0; i < n; ++i) check(s, i);
      continue;
    }
    std::size_t done = 0;
    for (std::size_t attempt = 0; done < share && attempt < 4 * share; ++attempt) {
      if (check(s, static_cast<std::size_t>(rng() % n))) ++done;
    }
  }
  return result;
}

}  // namespace seisint::nn
