// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "msnet/common/error.hpp"

namespace msnet::ad {
namespace {

double evaluate(ParameterStore& params, const LossBuilder& build, const std::vector<Tensor>* frozen) {
  Graph g(params, /*record_gradients=*/false);
  if (frozen) g.freeze_stop_gradients(*frozen);
  const double loss = build(g).value()[0];
  if (!std::isfinite(loss)) {
    throw Error(errc::kNonFinite, "gradient check: loss is not finite");
  }
  return loss;
}

std::vector<std::size_t> pick_entries(std::size_t size, const GradCheckOptions& options,
                                      std::uint64_t salt) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (options.max_entries_per_param == 0) return all;
  const std::size_t limit = std::max<std::size_t>(options.max_entries_per_param, 50);
  if (size <= limit) return all;
  std::mt19937_64 rng(options.seed ^ salt);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(limit);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

double relative_error(double tape, double numeric, double magnitude_floor) {
  const double scale = std::max({std::abs(tape), std::abs(numeric), magnitude_floor});
  return std::abs(tape - numeric) / scale;
}

bool GradCheckReport::passed() const {
  return std::all_of(params.begin(), params.end(), [](const ParamCheck& p) { return p.failures == 0; });
}

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& p : params) worst = std::max(worst, p.max_rel_error);
  return worst;
}

const ParamCheck& GradCheckReport::at(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw Error(errc::kInvalidArgument, "no gradient check entry for '" + name + "'");
}

GradCheckReport check_gradients(ParameterStore& params, const LossBuilder& build,
                                const GradCheckOptions& options) {
  GradMap tape;
  std::vector<Tensor> sg_values;
  {
    Graph g(params);
    Var loss = build(g);
    if (!std::isfinite(loss.value()[0])) {
      throw Error(errc::kNonFinite, "gradient check: loss is not finite");
    }
    sg_values = g.stop_gradient_values();
    tape = g.backward(loss);
  }

  const std::vector<Tensor>* frozen = options.freeze_stop_gradients ? &sg_values : nullptr;
  GradCheckReport report;
  std::uint64_t salt = 0;
  for (const std::string& name : params.names()) {
    Parameter& p = params.get(name);
    const Tensor grad = tape.densify(name, p.value.shape());
    ParamCheck check;
    check.name = name;
    bool tape_all_zero = true;
    bool numeric_nonzero = false;
    std::vector<std::pair<std::size_t, std::pair<double, double>>> entries;
    for (std::size_t i : pick_entries(p.value.size(), options, ++salt)) {
      const double saved = p.value[i];
      p.value[i] = saved + options.step;
      const double up = evaluate(params, build, frozen);
      p.value[i] = saved - options.step;
      const double down = evaluate(params, build, frozen);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      tape_all_zero = tape_all_zero && grad[i] == 0.0;
      numeric_nonzero = numeric_nonzero || std::abs(numeric) > options.magnitude_floor;
      entries.push_back({i, {grad[i], numeric}});
      ++check.checked;
    }
    check.blocked = tape_all_zero && numeric_nonzero;
    if (!check.blocked) {
      for (const auto& [i, pair] : entries) {
        const double err = relative_error(pair.first, pair.second, options.magnitude_floor);
        if (err > options.tolerance) ++check.failures;
        if (err >= check.max_rel_error) {
          check.max_rel_error = err;
          check.worst_entry = i;
          check.worst_tape = pair.first;
          check.worst_numeric = pair.second;
        }
      }
    }
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace msnet::ad
