#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "seisint/error.hpp"

namespace seisint::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major array of T with a runtime shape.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{})
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor: " + std::to_string(data_.size()) + " values for shape " +
                       shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  T& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T{}); }

  /// Same data, new shape of equal size.
  BasicTensor reshaped(Shape shape) const& { return BasicTensor(std::move(shape), data_); }
  BasicTensor reshaped(Shape shape) && { return BasicTensor(std::move(shape), std::move(data_)); }

  bool operator==(const BasicTensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.size());
  std::transform(t.values().begin(), t.values().end(), out.begin(),
                 [](From v) { return static_cast<To>(v); });
  return BasicTensor<To>(t.shape(), std::move(out));
}

template <typename T>
void require_shape(const BasicTensor<T>& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " +
                     shape_string(t.shape()));
  }
}

/// Weights, bias and their gradients for one layer. Gradients are allocated
/// on demand so inference-only models carry no gradient storage.
template <typename T>
struct LayerParams {
  std::string name;
  BasicTensor<T> weights;
  BasicTensor<T> bias;
  BasicTensor<T> weight_grad;
  BasicTensor<T> bias_grad;

  void allocate_gradients() {
    if (weight_grad.shape() != weights.shape()) weight_grad = BasicTensor<T>(weights.shape());
    if (bias_grad.shape() != bias.shape()) bias_grad = BasicTensor<T>(bias.shape());
  }
  void zero_gradients() {
    weight_grad.zero();
    bias_grad.zero();
  }
  void release_gradients() {
    weight_grad = BasicTensor<T>();
    bias_grad = BasicTensor<T>();
  }
  bool has_gradients() const {
    return weight_grad.shape() == weights.shape() && bias_grad.shape() == bias.shape();
  }
  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

}  // namespace seisint::nn
