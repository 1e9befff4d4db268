// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "msnet/autodiff/tensor.hpp"

namespace msnet::ad {

// Glorot/Xavier uniform: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<double> v(fan_in * fan_out);
  for (double& x : v) x = dist(rng);
  return Tensor({fan_in, fan_out}, std::move(v));
}

}  // namespace msnet::ad
