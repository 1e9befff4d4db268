// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/autodiff/parameters.hpp"

#include "msnet/common/error.hpp"

namespace msnet::ad {

Parameter& ParameterStore::add(const std::string& name, Tensor init, bool sparse) {
  if (contains(name)) {
    throw Error(errc::kInvalidArgument, "parameter '" + name + "' registered twice");
  }
  if (sparse && init.rank() != 2) {
    throw Error(errc::kShapeMismatch, "embedding table '" + name + "' must be rank 2");
  }
  auto param = std::make_unique<Parameter>(Parameter{name, std::move(init), sparse});
  Parameter& ref = *param;
  index_.emplace(name, std::move(param));
  order_.push_back(name);
  return ref;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(errc::kInvalidArgument, "unknown parameter '" + name + "'");
  }
  return *it->second;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

std::size_t ParameterStore::total_entries() const {
  std::size_t total = 0;
  for (const auto& name : order_) total += index_.at(name)->value.size();
  return total;
}

std::size_t ParameterStore::copy_shared_from(const ParameterStore& other) {
  std::size_t copied = 0;
  for (const auto& name : order_) {
    if (!other.contains(name)) continue;
    const Parameter& src = other.get(name);
    Parameter& dst = get(name);
    if (src.value.shape() != dst.value.shape()) continue;
    dst.value = src.value;
    ++copied;
  }
  return copied;
}

ParameterStore ParameterStore::clone() const {
  ParameterStore out;
  for (const auto& name : order_) {
    const Parameter& p = get(name);
    out.add(p.name, p.value, p.sparse);
  }
  return out;
}

const ParamGrad& GradMap::at(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    throw Error(errc::kInvalidArgument, "no gradient for '" + name + "'");
  }
  return it->second;
}

Tensor GradMap::densify(const std::string& name, const Shape& param_shape) const {
  const ParamGrad& g = at(name);
  if (!g.sparse) return g.dense;
  Tensor out(param_shape, 0.0);
  const std::size_t dim = out.cols();
  for (std::size_t k = 0; k < g.rows.rows.size(); ++k) {
    const auto src = g.rows.row(k);
    for (std::size_t j = 0; j < dim; ++j) out.at(g.rows.rows[k], j) = src[j];
  }
  return out;
}

std::vector<std::size_t> SparseRows::nonzero_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (double g : row(k)) {
      if (g != 0.0) {
        out.push_back(rows[k]);
        break;
      }
    }
  }
  return out;
}

}  // namespace msnet::ad
