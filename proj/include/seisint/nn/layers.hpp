#pragma once

// Layer primitives used by the intensity models: a square-kernel 2-D
// cross-correlation, an affine (dense) map, and elementwise activations.
//
// Every op skips exactly-zero inputs when the input is sparse enough for that
// to pay off. Skipping only removes `w * 0` terms, so the sparse and dense
// paths agree to rounding, and which path runs depends only on the data.
// Sums are accumulated in double and reduced in a fixed order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "seisint/nn/parallel.hpp"
#include "seisint/nn/tensor.hpp"

namespace seisint::nn {

namespace detail {

struct SparseEntry {
  std::size_t channel;
  std::size_t row;
  std::size_t col;
  double value;
};

template <typename T>
std::vector<SparseEntry> nonzero_entries(const BasicTensor<T>& chw) {
  std::vector<SparseEntry> out;
  const std::size_t c_n = chw.extent(0), h = chw.extent(1), w = chw.extent(2);
  for (std::size_t c = 0; c < c_n; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const T v = chw.at(c, y, x);
        if (v != T{}) out.push_back({c, y, x, static_cast<double>(v)});
      }
  return out;
}

struct ConvGeometry {
  std::size_t channels, height, width, filters, kernel, out_height, out_width, padding;
};

template <typename T>
ConvGeometry conv_geometry(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                           const BasicTensor<T>& bias, std::size_t padding) {
  if (input.rank() != 3) throw ShapeError("conv2d: input must be CxHxW, got " + shape_string(input.shape()));
  if (weights.rank() != 4) {
    throw ShapeError("conv2d: weights must be FxCxKxK, got " + shape_string(weights.shape()));
  }
  ConvGeometry g{};
  g.channels = input.extent(0);
  g.height = input.extent(1);
  g.width = input.extent(2);
  g.filters = weights.extent(0);
  g.kernel = weights.extent(2);
  g.padding = padding;
  if (weights.extent(1) != g.channels) throw ShapeError("conv2d: weight channels do not match input");
  if (weights.extent(3) != g.kernel) throw ShapeError("conv2d: kernel must be square");
  if (g.kernel % 2 == 0) throw ShapeError("conv2d: kernel size must be odd");
  require_shape(bias, {g.filters}, "conv2d bias");
  if (g.height + 2 * padding < g.kernel || g.width + 2 * padding < g.kernel) {
    throw ShapeError("conv2d: kernel larger than padded input");
  }
  g.out_height = g.height + 2 * padding - g.kernel + 1;
  g.out_width = g.width + 2 * padding - g.kernel + 1;
  return g;
}

// Valid kernel offsets k with 0 <= pos + k - pad < extent.
inline std::pair<std::size_t, std::size_t> kernel_range(std::size_t pos, std::size_t pad,
                                                        std::size_t kernel, std::size_t extent) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(pad) -
                                                            static_cast<std::ptrdiff_t>(pos));
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(kernel),
      static_cast<std::ptrdiff_t>(extent + pad) - static_cast<std::ptrdiff_t>(pos));
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Dot product with independent lanes so the loop vectorizes without
// reassociating a single accumulator.
template <typename T>
double dot(const T* a, const T* b, std::size_t n) {
  constexpr std::size_t kLanes = 8;
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l)
      acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
  double s = 0.0;
  for (std::size_t l = 0; l < kLanes; ++l) s += acc[l];
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <typename T>
std::vector<std::size_t> nonzero_columns(const BasicTensor<T>& rows) {
  const std::size_t b_n = rows.extent(0), n = rows.extent(1);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < b_n; ++b) {
      if (rows[b * n + i] != T{}) {
        cols.push_back(i);
        break;
      }
    }
  }
  return cols;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution

/// Cross-correlation with zero padding: out[f,y,x] = bias[f] +
/// sum_{c,i,j} w[f,c,i,j] * in[c, y+i-pad, x+j-pad].
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              const BasicTensor<T>& bias, std::size_t padding,
                              const Executor& exec = Executor()) {
  const auto g = detail::conv_geometry(input, weights, bias, padding);
  BasicTensor<T> out({g.filters, g.out_height, g.out_width});
  const std::size_t k = g.kernel, kk = k * k;
  const auto nz = detail::nonzero_entries(input);
  const bool sparse = nz.size() < g.channels * kk;

  exec.parallel_for(g.filters * g.out_height, [&](std::size_t begin, std::size_t end) {
    for (std::size_t fy = begin; fy < end; ++fy) {
      const std::size_t f = fy / g.out_height, yo = fy % g.out_height;
      const T* wf = weights.data() + f * g.channels * kk;
      for (std::size_t xo = 0; xo < g.out_width; ++xo) {
        double acc = static_cast<double>(bias[f]);
        if (sparse) {
          for (const auto& e : nz) {
            const std::ptrdiff_t ky = static_cast<std::ptrdiff_t>(e.row + g.padding) - static_cast<std::ptrdiff_t>(yo);
            const std::ptrdiff_t kx = static_cast<std::ptrdiff_t>(e.col + g.padding) - static_cast<std::ptrdiff_t>(xo);
            if (ky < 0 || kx < 0 || ky >= static_cast<std::ptrdiff_t>(k) || kx >= static_cast<std::ptrdiff_t>(k)) continue;
            acc += static_cast<double>(wf[e.channel * kk + static_cast<std::size_t>(ky) * k + static_cast<std::size_t>(kx)]) * e.value;
          }
        } else {
          const auto [ky0, ky1] = detail::kernel_range(yo, g.padding, k, g.height);
          const auto [kx0, kx1] = detail::kernel_range(xo, g.padding, k, g.width);
          if (kx0 < kx1)
            for (std::size_t c = 0; c < g.channels; ++c)
            for (std::size_t ky = ky0; ky < ky1; ++ky) {
              const T* in_row = &input.at(c, yo + ky - g.padding, xo + kx0 - g.padding);
              const T* w_row = wf + c * kk + ky * k + kx0;
              for (std::size_t kx = 0; kx < kx1 - kx0; ++kx)
                acc += static_cast<double>(w_row[kx]) * static_cast<double>(in_row[kx]);
            }
        }
        out.at(f, yo, xo) = static_cast<T>(acc);
      }
    }
  });
  return out;
}

/// Accumulates d(loss)/d(weights, bias[, input]) for one conv2d_forward call.
/// `input_grad` may be null when the input is not trainable.
template <typename T>
void conv2d_backward_accumulate(const BasicTensor<T>& upstream, const BasicTensor<T>& cached_input,
                                const BasicTensor<T>& weights, std::size_t padding,
                                BasicTensor<T>& weight_grad, BasicTensor<T>& bias_grad,
                                std::type_identity_t<BasicTensor<T>>* input_grad, const Executor& exec = Executor()) {
  const auto g = detail::conv_geometry(cached_input, weights, bias_grad, padding);
  require_shape(upstream, {g.filters, g.out_height, g.out_width}, "conv2d upstream");
  require_shape(weight_grad, weights.shape(), "conv2d weight_grad");
  if (input_grad) require_shape(*input_grad, cached_input.shape(), "conv2d input_grad");
  const std::size_t k = g.kernel, kk = k * k, plane = g.out_height * g.out_width;

  for (std::size_t f = 0; f < g.filters; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += static_cast<double>(upstream[f * plane + i]);
    bias_grad[f] += static_cast<T>(s);
  }

  const auto nz = detail::nonzero_entries(cached_input);
  if (nz.size() < g.channels * kk) {
    // Each filter owns its slice of weight_grad.
    exec.parallel_for(g.filters, [&](std::size_t begin, std::size_t end) {
      std::vector<double> acc(g.channels * kk);
      for (std::size_t f = begin; f < end; ++f) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const T* up = upstream.data() + f * plane;
        for (const auto& e : nz) {
          double* a = acc.data() + e.channel * kk;
          for (std::size_t yo = 0; yo < g.out_height; ++yo) {
            const std::ptrdiff_t ky = static_cast<std::ptrdiff_t>(e.row + g.padding) - static_cast<std::ptrdiff_t>(yo);
            if (ky < 0 || ky >= static_cast<std::ptrdiff_t>(k)) continue;
            for (std::size_t xo = 0; xo < g.out_width; ++xo) {
              const std::ptrdiff_t kx = static_cast<std::ptrdiff_t>(e.col + g.padding) - static_cast<std::ptrdiff_t>(xo);
              if (kx < 0 || kx >= static_cast<std::ptrdiff_t>(k)) continue;
              a[static_cast<std::size_t>(ky) * k + static_cast<std::size_t>(kx)] +=
                  static_cast<double>(up[yo * g.out_width + xo]) * e.value;
            }
          }
        }
        T* wg = weight_grad.data() + f * g.channels * kk;
        for (std::size_t i = 0; i < acc.size(); ++i) wg[i] += static_cast<T>(acc[i]);
      }
    });
  } else {
    exec.parallel_for(g.filters * g.channels, [&](std::size_t begin, std::size_t end) {
      for (std::size_t fc = begin; fc < end; ++fc) {
        const std::size_t f = fc / g.channels, c = fc % g.channels;
        const T* up = upstream.data() + f * plane;
        T* wg = weight_grad.data() + fc * kk;
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx) {
            double acc = 0.0;
            for (std::size_t yo = 0; yo < g.out_height; ++yo) {
              const std::ptrdiff_t yi = static_cast<std::ptrdiff_t>(yo + ky) - static_cast<std::ptrdiff_t>(g.padding);
              if (yi < 0 || yi >= static_cast<std::ptrdiff_t>(g.height)) continue;
              for (std::size_t xo = 0; xo < g.out_width; ++xo) {
                const std::ptrdiff_t xi = static_cast<std::ptrdiff_t>(xo + kx) - static_cast<std::ptrdiff_t>(g.padding);
                if (xi < 0 || xi >= static_cast<std::ptrdiff_t>(g.width)) continue;
                acc += static_cast<double>(up[yo * g.out_width + xo]) *
                       static_cast<double>(cached_input.at(c, static_cast<std::size_t>(yi), static_cast<std::size_t>(xi)));
              }
            }
            wg[ky * k + kx] += static_cast<T>(acc);
          }
      }
    });
  }

  if (!input_grad) return;
  exec.parallel_for(g.channels * g.height, [&](std::size_t begin, std::size_t end) {
    for (std::size_t cy = begin; cy < end; ++cy) {
      const std::size_t c = cy / g.height, yi = cy % g.height;
      for (std::size_t xi = 0; xi < g.width; ++xi) {
        double acc = 0.0;
        for (std::size_t f = 0; f < g.filters; ++f) {
          const T* wfc = weights.data() + (f * g.channels + c) * kk;
          const T* up = upstream.data() + f * plane;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t yo = static_cast<std::ptrdiff_t>(yi + g.padding) - static_cast<std::ptrdiff_t>(ky);
            if (yo < 0 || yo >= static_cast<std::ptrdiff_t>(g.out_height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t xo = static_cast<std::ptrdiff_t>(xi + g.padding) - static_cast<std::ptrdiff_t>(kx);
              if (xo < 0 || xo >= static_cast<std::ptrdiff_t>(g.out_width)) continue;
              acc += static_cast<double>(wfc[ky * k + kx]) *
                     static_cast<double>(up[static_cast<std::size_t>(yo) * g.out_width + static_cast<std::size_t>(xo)]);
            }
          }
        }
        input_grad->at(c, yi, xi) += static_cast<T>(acc);
      }
    }
  });
}

template <typename T>
struct ConvGradients {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& cached_input,
                                 const BasicTensor<T>& weights, std::size_t padding,
                                 const Executor& exec = Executor()) {
  ConvGradients<T> grads{BasicTensor<T>(cached_input.shape()), BasicTensor<T>(weights.shape()),
                         BasicTensor<T>({weights.rank() == 4 ? weights.extent(0) : 0})};
  conv2d_backward_accumulate(upstream, cached_input, weights, padding, grads.weights, grads.bias,
                             &grads.input, exec);
  return grads;
}

// ---------------------------------------------------------------------------
// Dense

/// Row-batched affine map: out[b] = W * in[b] + bias, with `inputs` of shape
/// B x In and weights Out x In.
template <typename T>
BasicTensor<T> dense_forward_batch(const BasicTensor<T>& inputs, const BasicTensor<T>& weights,
                                   const BasicTensor<T>& bias, const Executor& exec = Executor()) {
  if (inputs.rank() != 2 || weights.rank() != 2) throw ShapeError("dense: expected BxIn inputs and OutxIn weights");
  const std::size_t b_n = inputs.extent(0), n_in = inputs.extent(1), n_out = weights.extent(0);
  if (weights.extent(1) != n_in) {
    throw ShapeError("dense: input length " + std::to_string(n_in) + " does not match weights " +
                     shape_string(weights.shape()));
  }
  require_shape(bias, {n_out}, "dense bias");
  BasicTensor<T> out({b_n, n_out});
  const auto cols = detail::nonzero_columns(inputs);
  const bool sparse = cols.size() * 4 < n_in;

  exec.parallel_for(n_out, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const T* w = weights.data() + j * n_in;
      for (std::size_t b = 0; b < b_n; ++b) {
        const T* x = inputs.data() + b * n_in;
        double acc = 0.0;
        if (sparse) {
          for (std::size_t i : cols) acc += static_cast<double>(w[i]) * static_cast<double>(x[i]);
        } else {
          acc = detail::dot(w, x, n_in);
        }
        out[b * n_out + j] = static_cast<T>(acc + static_cast<double>(bias[j]));
      }
    }
  });
  return out;
}

/// Accumulates gradients of a dense_forward_batch call. `input_grads` (B x In)
/// may be null.
template <typename T>
void dense_backward_accumulate(const BasicTensor<T>& upstream, const BasicTensor<T>& cached_inputs,
                               const BasicTensor<T>& weights, BasicTensor<T>& weight_grad,
                               BasicTensor<T>& bias_grad, std::type_identity_t<BasicTensor<T>>* input_grads,
                               const Executor& exec = Executor()) {
  if (cached_inputs.rank() != 2 || weights.rank() != 2) throw ShapeError("dense backward: bad ranks");
  const std::size_t b_n = cached_inputs.extent(0), n_in = cached_inputs.extent(1),
                    n_out = weights.extent(0);
  if (weights.extent(1) != n_in) throw ShapeError("dense backward: input/weight mismatch");
  require_shape(upstream, {b_n, n_out}, "dense upstream");
  require_shape(weight_grad, weights.shape(), "dense weight_grad");
  require_shape(bias_grad, {n_out}, "dense bias_grad");
  if (input_grads) require_shape(*input_grads, cached_inputs.shape(), "dense input_grad");

  const auto cols = detail::nonzero_columns(cached_inputs);
  const bool sparse = cols.size() * 4 < n_in;

  exec.parallel_for(n_out, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double bsum = 0.0;
      for (std::size_t b = 0; b < b_n; ++b) bsum += static_cast<double>(upstream[b * n_out + j]);
      bias_grad[j] += static_cast<T>(bsum);
      T* wg = weight_grad.data() + j * n_in;
      for (std::size_t b = 0; b < b_n; ++b) {
        const T d = upstream[b * n_out + j];
        if (d == T{}) continue;
        const T* x = cached_inputs.data() + b * n_in;
        if (sparse) {
          for (std::size_t i : cols) wg[i] += d * x[i];
        } else {
          for (std::size_t i = 0; i < n_in; ++i) wg[i] += d * x[i];
        }
      }
    }
  });

  if (!input_grads) return;
  constexpr std::size_t kBlock = 512;
  const std::size_t blocks = (n_in + kBlock - 1) / kBlock;
  exec.parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(b_n * kBlock);
    for (std::size_t blk = begin; blk < end; ++blk) {
      const std::size_t i0 = blk * kBlock, i1 = std::min(n_in, i0 + kBlock), len = i1 - i0;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j = 0; j < n_out; ++j) {
        const T* w = weights.data() + j * n_in + i0;
        for (std::size_t b = 0; b < b_n; ++b) {
          const double d = static_cast<double>(upstream[b * n_out + j]);
          if (d == 0.0) continue;
          double* a = acc.data() + b * kBlock;
          for (std::size_t i = 0; i < len; ++i) a[i] += d * static_cast<double>(w[i]);
        }
      }
      for (std::size_t b = 0; b < b_n; ++b)
        for (std::size_t i = 0; i < len; ++i)
          (*input_grads)[b * n_in + i0 + i] += static_cast<T>(acc[b * kBlock + i]);
    }
  });
}

/// Single-vector affine map; `input` may have any shape with In elements.
template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& bias, const Executor& exec = Executor()) {
  auto out = dense_forward_batch(input.reshaped({1, input.size()}), weights, bias, exec);
  return std::move(out).reshaped({out.size()});
}

template <typename T>
struct DenseGradients {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

template <typename T>
DenseGradients<T> dense_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& cached_input,
                                 const BasicTensor<T>& weights, const Executor& exec = Executor()) {
  const auto in2 = cached_input.reshaped({1, cached_input.size()});
  DenseGradients<T> grads{BasicTensor<T>(in2.shape()), BasicTensor<T>(weights.shape()),
                          BasicTensor<T>({weights.rank() == 2 ? weights.extent(0) : 0})};
  dense_backward_accumulate(upstream.reshaped({1, upstream.size()}), in2, weights, grads.weights,
                            grads.bias, &grads.input, exec);
  grads.input = std::move(grads.input).reshaped(cached_input.shape());
  return grads;
}

// ---------------------------------------------------------------------------
// Activations

template <typename T>
T sigmoid(T x) {
  if (x >= T{}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
BasicTensor<T> sigmoid_forward(BasicTensor<T> t) {
  for (auto& v : t.values()) v = sigmoid(v);
  return t;
}

/// Gradient through sigmoid given its forward output.
template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& output) {
  require_shape(upstream, output.shape(), "sigmoid_backward");
  BasicTensor<T> g(output.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = upstream[i] * output[i] * (T{1} - output[i]);
  return g;
}

template <typename T>
BasicTensor<T> relu_forward(BasicTensor<T> t) {
  for (auto& v : t.values()) v = v > T{} ? v : T{};
  return t;
}

/// Gradient through relu given its forward input; the subgradient at 0 is 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& upstream, const BasicTensor<T>& input) {
  require_shape(upstream, input.shape(), "relu_backward");
  BasicTensor<T> g(input.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = input[i] > T{} ? upstream[i] : T{};
  return g;
}

}  // namespace seisint::nn
