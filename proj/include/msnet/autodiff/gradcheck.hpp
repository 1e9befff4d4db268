// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msnet/autodiff/graph.hpp"

namespace msnet::ad {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Gradients smaller than this are compared on an absolute scale, since the
  // central difference carries ~1e-11 of round-off regardless of magnitude.
  double magnitude_floor = 1e-6;
  // 0 checks every entry; otherwise at least max(limit, 50) sampled entries.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 17;
  // Hold every stop_gradient output at its unperturbed value, so the central
  // difference measures the surrogate the tape differentiates. Off, a
  // parameter reached only through stop_gradient is reported as blocked.
  bool freeze_stop_gradients = false;
};

struct ParamCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  std::size_t worst_entry = 0;
  double worst_tape = 0.0;
  double worst_numeric = 0.0;
  // Tape gradient is identically zero while the central difference is not:
  // the parameter only reaches the loss through stop_gradient edges.
  bool blocked = false;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;

  bool passed() const;
  double max_rel_error() const;
  const ParamCheck& at(const std::string& name) const;
};

using LossBuilder = std::function<Var(Graph&)>;

double relative_error(double tape, double numeric, double magnitude_floor);

// Compares tape gradients against central differences
// (f(theta + h) - f(theta - h)) / 2h, one parameter entry at a time. The loss
// builder must be deterministic. Parameters are restored on return.
GradCheckReport check_gradients(ParameterStore& params, const LossBuilder& build,
                                const GradCheckOptions& options = {});

}  // namespace msnet::ad
