// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/autodiff/tensor.hpp"

#include <cmath>
#include <numeric>

#include "msnet/common/error.hpp"

namespace msnet::ad {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.empty()) {
    throw Error(errc::kShapeMismatch, "tensor shape must have at least one dimension");
  }
  if (shape_size(shape_) != values_.size()) {
    throw Error(errc::kShapeMismatch, "shape " + shape_string(shape_) + " does not hold " +
                                          std::to_string(values_.size()) + " values");
  }
}

Tensor::Tensor(Shape shape, double fill) : Tensor(shape, std::vector<double>(shape_size(shape), fill)) {}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), values_); }

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace msnet::ad
