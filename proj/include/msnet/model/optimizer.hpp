// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "msnet/autodiff/parameters.hpp"

namespace msnet::model {

// Squared-gradient accumulators, laid out like the parameters (embedding
// tables keep a full row-major accumulator; only touched rows change).
struct OptimizerState {
  std::map<std::string, std::vector<double>> acc;
  std::uint64_t steps = 0;
  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

// Adagrad with optional accumulator decay:
//   acc <- decay * acc + g^2;  theta <- theta - lr * g / (sqrt(acc) + eps)
class Adagrad {
 public:
  static constexpr double kEps = 1e-8;

  Adagrad(double learning_rate, double decay = 1.0) : lr_(learning_rate), decay_(decay) {}

  // Throws (before touching anything) when a gradient is non-finite.
  void step(ad::ParameterStore& params, const ad::GradMap& grads, OptimizerState& state) const;

 private:
  double lr_;
  double decay_;
};

}  // namespace msnet::model
