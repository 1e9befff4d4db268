// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "msnet/autodiff/parameters.hpp"
#include "msnet/autodiff/tensor.hpp"

namespace msnet::ad {

class Graph;

// Handle to a node recorded on a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  bool valid() const noexcept { return graph_ != nullptr && id_ >= 0; }
  Graph& graph() const { return *graph_; }
  int id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Define-by-run tape. Each forward op appends a node holding its value and a
// closure that pushes the node's upstream gradient into its inputs. Nodes
// that do not depend on any parameter carry no closure, so constants and
// stop_gradient outputs are never visited during backward.
//
// A Graph is built per batch and consumed by one call to backward().
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  explicit Graph(const ParameterStore& params, bool record_gradients = true);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);

  // Dense parameter leaf. Repeated calls with the same name return the same
  // node. Sparse (embedding) parameters must go through gather_rows.
  Var parameter(const std::string& name);

  // Rows of an embedding table; backward accumulates each output row's
  // gradient into its source row, summing duplicates.
  Var gather_rows(const std::string& table, std::span<const std::size_t> indices);

  // Gradient of a scalar loss w.r.t. every parameter in the store.
  GradMap backward(Var loss);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool records_gradients() const noexcept { return record_; }
  bool consumed() const noexcept { return consumed_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const ParameterStore& params() const noexcept { return params_; }

  // Stop-gradient outputs in creation order. Once frozen, the k-th
  // stop_gradient on this graph returns values[k] instead of its input, so a
  // finite difference sees the same surrogate loss the tape differentiates.
  void freeze_stop_gradients(std::vector<Tensor> values);
  const std::vector<Tensor>& stop_gradient_values() const noexcept { return sg_values_; }
  Tensor next_stop_gradient(const Tensor& computed);

  // --- used by op implementations ---
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool any_needs_grad(std::initializer_list<Var> inputs) const;
  Var record(Tensor value, std::vector<int> inputs, BackwardFn backward);
  std::span<const double> grad(int id) const;
  std::span<double> grad_buffer(int id);

 private:
  struct Node {
    Tensor value;
    std::vector<int> inputs;
    BackwardFn backward;
    std::vector<double> grad;
    bool needs_grad = false;
  };

  struct TableGrad {
    std::size_t dim = 0;
    std::vector<std::size_t> rows;
    std::vector<double> values;
  };

  void check_live() const;

  const ParameterStore& params_;
  bool record_;
  bool consumed_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_nodes_;
  std::map<std::string, TableGrad> table_grads_;
  std::vector<Tensor> sg_values_;
  std::vector<Tensor> sg_frozen_;
  bool sg_is_frozen_ = false;
};

using Mask = std::vector<std::uint8_t>;

// ---- ops ----------------------------------------------------------------
// Shapes: "rows" means the product of all leading dimensions; every row-wise
// op works along the trailing dimension.

Var matmul(Var a, Var b);                 // a[..., K] x b[K, N] -> [..., N]
Var add(Var a, Var b);                    // equal shapes
Var sub(Var a, Var b);
Var mul(Var a, Var b);                    // elementwise
Var div(Var a, Var b);                    // elementwise
Var add_bias(Var x, Var bias);            // x[..., N] + bias[N]
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var reshape(Var x, Shape shape);
Var concat_cols(std::initializer_list<Var> parts);
Var concat_cols(std::span<const Var> parts);
Var repeat_rows(Var x, std::size_t times);  // [R, D] -> [R, times, D]

// Row softmax with optional mask (rows x cols, nonzero = keep). Masked
// entries are exactly 0; a row with no kept entry is all zeros.
Var softmax_rows(Var x, std::span<const std::uint8_t> mask = {});
Var sigmoid(Var x);
Var leaky_relu(Var x, double slope = 0.01);
Var clamp(Var x, double lo, double hi);
Var stop_gradient(Var x);

Var norm_rows(Var x);                     // [..., D] -> [rows]
Var blend_rows(Var weight, Var a, Var b); // w[rows]: w*a + (1-w)*b per row

inline constexpr double kCosineEps = 1e-12;
// dot(a_i, b_i) / (|a_i| |b_i| + eps); b has one row (broadcast) or as many
// rows as a.
Var cosine_sim_rows(Var a, Var b);

Var row_dot(Var query, Var keys);         // q[B, d], k[B, H, d] -> [B, H]
Var weighted_sum(Var weights, Var values);  // w[B, H], v[B, H, d] -> [B, d]

Var sum(Var x);
Var mean(Var x);
// Mean over entries with nonzero mask; 0 when nothing is selected.
Var masked_mean(Var x, std::span<const std::uint8_t> mask);
Var squared_error(Var a, Var b);          // elementwise (a - b)^2
// -mean(y log p + (1 - y) log(1 - p)).
Var binary_cross_entropy(Var p, std::span<const double> labels);

}  // namespace msnet::ad
