// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "msnet/autodiff/tensor.hpp"

namespace msnet::ad {

// A named trainable leaf. Embedding tables are flagged sparse: they only
// enter a graph through gather_rows and receive row-sparse gradients.
struct Parameter {
  std::string name;
  Tensor value;
  bool sparse = false;
};

// Insertion-ordered registry of parameters. References stay valid for the
// store's lifetime.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Tensor init, bool sparse = false);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  const std::vector<std::string>& names() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }
  std::size_t total_entries() const;

  // Copies values for every name present in both stores with equal shape.
  // Returns the number of parameters copied.
  std::size_t copy_shared_from(const ParameterStore& other);

  ParameterStore clone() const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::unique_ptr<Parameter>> index_;
};

// Row-sparse gradient for an embedding table: rows are ascending and unique,
// values hold rows.size() * dim entries.
struct SparseRows {
  std::size_t dim = 0;
  std::vector<std::size_t> rows;
  std::vector<double> values;

  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values).subspan(k * dim, dim);
  }
  // Rows whose summed gradient has at least one nonzero entry.
  std::vector<std::size_t> nonzero_rows() const;
};

struct ParamGrad {
  bool sparse = false;
  Tensor dense;        // valid when !sparse; same shape as the parameter
  SparseRows rows;     // valid when sparse
};

// Gradient for every registered parameter. Parameters the loss never
// reached get an all-zero dense tensor or an empty row list.
class GradMap {
 public:
  void set(const std::string& name, ParamGrad grad) { grads_[name] = std::move(grad); }
  bool contains(const std::string& name) const { return grads_.count(name) != 0; }
  const ParamGrad& at(const std::string& name) const;

  // Dense view of any gradient, expanding sparse rows into a zero tensor of
  // the given parameter shape.
  Tensor densify(const std::string& name, const Shape& param_shape) const;

  const std::map<std::string, ParamGrad>& entries() const noexcept { return grads_; }

 private:
  std::map<std::string, ParamGrad> grads_;
};

}  // namespace msnet::ad
