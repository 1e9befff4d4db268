// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/autodiff/graph.hpp"

#include <algorithm>
#include <numeric>

#include "msnet/common/error.hpp"

namespace msnet::ad {

const Tensor& Var::value() const {
  if (!valid()) throw Error(errc::kInvalidArgument, "use of an empty Var");
  return graph_->value(id_);
}

Graph::Graph(const ParameterStore& params, bool record_gradients)
    : params_(params), record_(record_gradients) {
  nodes_.reserve(256);
}

void Graph::check_live() const {
  if (consumed_) throw Error(errc::kInvalidArgument, "graph already consumed by backward()");
}

Var Graph::constant(Tensor value) {
  check_live();
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::parameter(const std::string& name) {
  check_live();
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  const Parameter& p = params_.get(name);
  if (p.sparse) {
    throw Error(errc::kInvalidArgument,
                "embedding table '" + name + "' must be read through gather_rows");
  }
  Node node;
  node.value = p.value;
  node.needs_grad = record_;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_.emplace(name, id);
  return Var(this, id);
}

Var Graph::gather_rows(const std::string& table, std::span<const std::size_t> indices) {
  check_live();
  const Parameter& p = params_.get(table);
  const Tensor& src = p.value;
  if (src.rank() != 2) {
    throw Error(errc::kShapeMismatch, "gather_rows: table '" + table + "' must be rank 2");
  }
  const std::size_t rows = src.shape()[0];
  const std::size_t dim = src.shape()[1];
  Tensor out({indices.size(), dim}, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows) {
      throw Error(errc::kIndexOutOfRange, "gather_rows: index " + std::to_string(indices[i]) +
                                              " out of range for table '" + table + "' with " +
                                              std::to_string(rows) + " rows");
    }
    std::copy_n(src.data().begin() + static_cast<std::ptrdiff_t>(indices[i] * dim), dim,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  Node node;
  node.value = std::move(out);
  node.needs_grad = record_ && !indices.empty();
  if (node.needs_grad) {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    node.backward = [table, idx = std::move(idx), dim](Graph& g, int self) {
      TableGrad& acc = g.table_grads_[table];
      acc.dim = dim;
      const auto up = g.grad(self);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        acc.rows.push_back(idx[i]);
        acc.values.insert(acc.values.end(), up.begin() + static_cast<std::ptrdiff_t>(i * dim),
                          up.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
      }
    };
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Graph::freeze_stop_gradients(std::vector<Tensor> values) {
  sg_frozen_ = std::move(values);
  sg_is_frozen_ = true;
}

Tensor Graph::next_stop_gradient(const Tensor& computed) {
  const std::size_t k = sg_values_.size();
  if (!sg_is_frozen_) {
    sg_values_.push_back(computed);
    return computed;
  }
  if (k >= sg_frozen_.size() || sg_frozen_[k].shape() != computed.shape()) {
    throw Error(errc::kInvalidArgument, "frozen stop_gradient values do not match the graph being built");
  }
  sg_values_.push_back(sg_frozen_[k]);
  return sg_frozen_[k];
}

bool Graph::any_needs_grad(std::initializer_list<Var> inputs) const {
  for (const Var& v : inputs) {
    if (needs_grad(v.id())) return true;
  }
  return false;
}

Var Graph::record(Tensor value, std::vector<int> inputs, BackwardFn backward) {
  check_live();
  const int self = static_cast<int>(nodes_.size());
  bool needs = false;
  for (int in : inputs) {
    if (in < 0 || in >= self) {
      throw Error(errc::kInvalidArgument, "op input does not precede its output on the tape");
    }
    needs = needs || nodes_[static_cast<std::size_t>(in)].needs_grad;
  }
  Node node;
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.needs_grad = record_ && needs && static_cast<bool>(backward);
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, self);
}

std::span<const double> Graph::grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

std::span<double> Graph::grad_buffer(int id) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

GradMap Graph::backward(Var loss) {
  check_live();
  if (&loss.graph() != this) {
    throw Error(errc::kInvalidArgument, "backward: loss belongs to another graph");
  }
  if (loss.value().size() != 1) {
    throw Error(errc::kShapeMismatch,
                "backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  }
  if (needs_grad(loss.id())) {
    grad_buffer(loss.id())[0] = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
      Node& node = nodes_[static_cast<std::size_t>(id)];
      if (node.backward && !node.grad.empty()) node.backward(*this, id);
    }
  }

  GradMap out;
  for (const std::string& name : params_.names()) {
    const Parameter& p = params_.get(name);
    ParamGrad pg;
    pg.sparse = p.sparse;
    if (p.sparse) {
      pg.rows.dim = p.value.cols();
      if (auto it = table_grads_.find(name); it != table_grads_.end()) {
        const TableGrad& acc = it->second;
        std::vector<std::size_t> order(acc.rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return acc.rows[a] < acc.rows[b]; });
        const std::size_t dim = acc.dim;
        for (std::size_t k : order) {
          const std::size_t row = acc.rows[k];
          if (pg.rows.rows.empty() || pg.rows.rows.back() != row) {
            pg.rows.rows.push_back(row);
            pg.rows.values.resize(pg.rows.values.size() + dim, 0.0);
          }
          double* dst = pg.rows.values.data() + pg.rows.values.size() - dim;
          for (std::size_t j = 0; j < dim; ++j) dst[j] += acc.values[k * dim + j];
        }
      }
    } else {
      pg.dense = Tensor(p.value.shape(), 0.0);
      if (auto it = param_nodes_.find(name); it != param_nodes_.end()) {
        const Node& node = nodes_[static_cast<std::size_t>(it->second)];
        if (!node.grad.empty()) pg.dense.data() = node.grad;
      }
    }
    out.set(name, std::move(pg));
  }
  consumed_ = true;
  table_grads_.clear();
  return out;
}

}  // namespace msnet::ad
