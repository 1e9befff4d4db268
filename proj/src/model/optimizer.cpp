// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/model/optimizer.hpp"

#include <cmath>

#include "msnet/common/error.hpp"

namespace msnet::model {

namespace {

bool finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void Adagrad::step(ad::ParameterStore& params, const ad::GradMap& grads, OptimizerState& state) const {
  for (const auto& [name, g] : grads.entries()) {
    const bool ok = g.sparse ? finite(g.rows.values) : finite(g.dense.values());
    if (!ok) throw Error(errc::kNonFinite, "non-finite gradient for parameter '" + name + "'");
  }
  auto update = [&](double& theta, double& acc, double g) {
    acc = decay_ * acc + g * g;
    if (lr_ != 0.0) theta -= lr_ * g / (std::sqrt(acc) + kEps);
  };
  for (const auto& [name, g] : grads.entries()) {
    ad::Parameter& p = params.get(name);
    auto& acc = state.acc[name];
    if (acc.size() != p.value.size()) acc.assign(p.value.size(), 0.0);
    auto theta = p.value.values();
    if (g.sparse) {
      const std::size_t dim = g.rows.dim;
      for (std::size_t k = 0; k < g.rows.rows.size(); ++k) {
        const std::size_t base = g.rows.rows[k] * dim;
        const auto row = g.rows.row(k);
        for (std::size_t c = 0; c < dim; ++c) update(theta[base + c], acc[base + c], row[c]);
      }
    } else {
      const auto gv = g.dense.values();
      for (std::size_t i = 0; i < gv.size(); ++i) update(theta[i], acc[i], gv[i]);
    }
  }
  ++state.steps;
}

}  // namespace msnet::model
