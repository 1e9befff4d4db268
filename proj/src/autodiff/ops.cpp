// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "msnet/autodiff/graph.hpp"
#include "msnet/common/error.hpp"

namespace msnet::ad {
namespace {

Graph& graph_of(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw Error(errc::kInvalidArgument, std::string(op) + ": operands from different graphs");
  }
  return a.graph();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(errc::kShapeMismatch, std::string(op) + ": shape " + shape_string(a.shape()) +
                                          " vs " + shape_string(b.shape()));
  }
}

Shape leading(const Shape& s) { return Shape(s.begin(), s.end() - 1); }

Shape row_shape(const Shape& s) {
  Shape out = leading(s);
  if (out.empty()) out.push_back(1);
  return out;
}

template <typename Fwd, typename Deriv>
Var unary(Var x, Fwd fwd, Deriv deriv) {
  const Tensor& in = x.value();
  Tensor out(in.shape(), 0.0);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  const int xi = x.id();
  return x.graph().record(std::move(out), {xi}, [xi, deriv](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& xv = g.value(xi);
    const Tensor& yv = g.value(self);
    auto dx = g.grad_buffer(xi);
    for (std::size_t i = 0; i < up.size(); ++i) dx[i] += up[i] * deriv(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rank() != 2 || av.cols() != bv.shape()[0]) {
    throw Error(errc::kShapeMismatch,
                "matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  const std::size_t rows = av.rows();
  const std::size_t inner = av.cols();
  const std::size_t cols = bv.shape()[1];
  Shape shape = leading(av.shape());
  shape.push_back(cols);
  Tensor out(shape, 0.0);
  const double* A = av.data().data();
  const double* B = bv.data().data();
  double* C = out.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    double* crow = C + i * cols;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = A[i * inner + k];
      const double* brow = B + k * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += aik * brow[j];
    }
  }
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi, rows, inner, cols](Graph& g, int self) {
    const double* G = g.grad(self).data();
    const double* A = g.value(ai).data().data();
    const double* B = g.value(bi).data().data();
    if (g.needs_grad(ai)) {
      double* dA = g.grad_buffer(ai).data();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < inner; ++k) {
          const double* brow = B + k * cols;
          const double* grow = G + i * cols;
          double acc = 0.0;
          for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * brow[j];
          dA[i * inner + k] += acc;
        }
      }
    }
    if (g.needs_grad(bi)) {
      double* dB = g.grad_buffer(bi).data();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* grow = G + i * cols;
        for (std::size_t k = 0; k < inner; ++k) {
          const double aik = A[i * inner + k];
          double* drow = dB + k * cols;
          for (std::size_t j = 0; j < cols; ++j) drow[j] += aik * grow[j];
        }
      }
    }
  });
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& g, int self) {
    const auto up = g.grad(self);
    for (int in : {ai, bi}) {
      if (!g.needs_grad(in)) continue;
      auto d = g.grad_buffer(in);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i];
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& g, int self) {
    const auto up = g.grad(self);
    if (g.needs_grad(ai)) {
      auto d = g.grad_buffer(ai);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i];
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] -= up[i];
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    if (g.needs_grad(ai)) {
      auto d = g.grad_buffer(ai);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] * bv[i];
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  Graph& g = graph_of(a, b, "div");
  require_same_shape(a.value(), b.value(), "div");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= bv[i];
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    if (g.needs_grad(ai)) {
      auto d = g.grad_buffer(ai);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] / bv[i];
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] -= up[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

Var add_bias(Var x, Var bias) {
  Graph& g = graph_of(x, bias, "add_bias");
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols()) {
    throw Error(errc::kShapeMismatch,
                "add_bias: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
  }
  Tensor out = xv;
  const std::size_t cols = xv.cols();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % cols];
  const int xi = x.id();
  const int bi = bias.id();
  return g.record(std::move(out), {xi, bi}, [xi, bi, cols](Graph& g, int self) {
    const auto up = g.grad(self);
    if (g.needs_grad(xi)) {
      auto d = g.grad_buffer(xi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i];
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i % cols] += up[i];
    }
  });
}

Var scale(Var x, double factor) {
  return unary(x, [factor](double v) { return v * factor; },
               [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset) {
  return unary(x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const int xi = x.id();
  return x.graph().record(std::move(out), {xi}, [xi](Graph& g, int self) {
    const auto up = g.grad(self);
    auto d = g.grad_buffer(xi);
    for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i];
  });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(errc::kInvalidArgument, "concat_cols: no inputs");
  Graph& g = parts.front().graph();
  const Shape lead = leading(parts.front().shape());
  const std::size_t rows = parts.front().value().rows();
  std::vector<int> ids;
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    graph_of(parts.front(), p, "concat_cols");
    if (leading(p.shape()) != lead) {
      throw Error(errc::kShapeMismatch, "concat_cols: leading shape " + shape_string(p.shape()) +
                                            " vs " + shape_string(parts.front().shape()));
    }
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Shape shape = lead;
  shape.push_back(total);
  Tensor out(shape, 0.0);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < widths[k]; ++j) out[r * total + offset + j] = v[r * widths[k] + j];
    }
    offset += widths[k];
  }
  return g.record(std::move(out), ids, [ids, widths, rows, total](Graph& g, int self) {
    const auto up = g.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) {
        auto d = g.grad_buffer(ids[k]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) d[r * widths[k] + j] += up[r * total + offset + j];
        }
      }
      offset += widths[k];
    }
  });
}

Var repeat_rows(Var x, std::size_t times) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  Tensor out({rows, times, cols}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < times; ++t) {
      std::copy_n(xv.data().begin() + static_cast<std::ptrdiff_t>(r * cols), cols,
                  out.data().begin() + static_cast<std::ptrdiff_t>((r * times + t) * cols));
    }
  }
  const int xi = x.id();
  return x.graph().record(std::move(out), {xi}, [xi, rows, times, cols](Graph& g, int self) {
    const auto up = g.grad(self);
    auto d = g.grad_buffer(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = 0; t < times; ++t) {
        for (std::size_t j = 0; j < cols; ++j) d[r * cols + j] += up[(r * times + t) * cols + j];
      }
    }
  });
}

Var softmax_rows(Var x, std::span<const std::uint8_t> mask) {
  const Tensor& xv = x.value();
  if (!mask.empty() && mask.size() != xv.size()) {
    throw Error(errc::kShapeMismatch, "softmax_rows: mask has " + std::to_string(mask.size()) +
                                          " entries for shape " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  Tensor out(xv.shape(), 0.0);
  auto kept = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * cols;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < cols; ++j) {
      if (kept(base + j)) {
        mx = std::max(mx, xv[base + j]);
        any = true;
      }
    }
    if (!any) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (kept(base + j)) {
        out[base + j] = std::exp(xv[base + j] - mx);
        total += out[base + j];
      }
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (kept(base + j)) out[base + j] /= total;
    }
  }
  const int xi = x.id();
  return x.graph().record(std::move(out), {xi}, [xi, rows, cols](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& y = g.value(self);
    auto d = g.grad_buffer(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += y[base + j] * up[base + j];
      for (std::size_t j = 0; j < cols; ++j) d[base + j] += y[base + j] * (up[base + j] - dot);
    }
  });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var leaky_relu(Var x, double slope) {
  return unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var clamp(Var x, double lo, double hi) {
  return unary(x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
               [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Var stop_gradient(Var x) {
  // Recorded with the input edge but no backward rule: nothing flows through.
  Graph& g = x.graph();
  return g.record(g.next_stop_gradient(x.value()), {x.id()}, nullptr);
}

Var norm_rows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  Tensor out(row_shape(xv.shape()), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += xv[r * cols + j] * xv[r * cols + j];
    out[r] = std::sqrt(s);
  }
  const int xi = x.id();
  return x.graph().record(std::move(out), {xi}, [xi, rows, cols](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& xv = g.value(xi);
    const Tensor& n = g.value(self);
    auto d = g.grad_buffer(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      if (n[r] == 0.0) continue;
      const double f = up[r] / n[r];
      for (std::size_t j = 0; j < cols; ++j) d[r * cols + j] += f * xv[r * cols + j];
    }
  });
}

Var blend_rows(Var weight, Var a, Var b) {
  Graph& g = graph_of(a, b, "blend_rows");
  graph_of(a, weight, "blend_rows");
  require_same_shape(a.value(), b.value(), "blend_rows");
  const Tensor& wv = weight.value();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  if (wv.size() != rows) {
    throw Error(errc::kShapeMismatch, "blend_rows: weight " + shape_string(wv.shape()) +
                                          " for " + std::to_string(rows) + " rows");
  }
  Tensor out(av.shape(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double w = wv[r];
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t i = r * cols + j;
      out[i] = w * av[i] + (1.0 - w) * bv[i];
    }
  }
  const int wi = weight.id();
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {wi, ai, bi}, [wi, ai, bi, rows, cols](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& wv = g.value(wi);
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    if (g.needs_grad(wi)) {
      auto d = g.grad_buffer(wi);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t i = r * cols + j;
          acc += up[i] * (av[i] - bv[i]);
        }
        d[r] += acc;
      }
    }
    if (g.needs_grad(ai)) {
      auto d = g.grad_buffer(ai);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] * wv[i / cols];
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] * (1.0 - wv[i / cols]);
    }
  });
}

Var cosine_sim_rows(Var a, Var b) {
  Graph& g = graph_of(a, b, "cosine_sim_rows");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  if (bv.cols() != cols || (bv.rows() != 1 && bv.rows() != rows)) {
    throw Error(errc::kShapeMismatch,
                "cosine_sim_rows: " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  }
  const bool broadcast = bv.rows() == 1 && rows != 1;
  auto brow = [broadcast](std::size_t r) { return broadcast ? 0 : r; };
  Tensor out({rows}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data().data() + r * cols;
    const double* y = bv.data().data() + brow(r) * cols;
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      dot += x[j] * y[j];
      nx += x[j] * x[j];
      ny += y[j] * y[j];
    }
    out[r] = dot / (std::sqrt(nx) * std::sqrt(ny) + kCosineEps);
  }
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi, rows, cols, broadcast](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    const bool need_a = g.needs_grad(ai);
    const bool need_b = g.needs_grad(bi);
    double* da = need_a ? g.grad_buffer(ai).data() : nullptr;
    double* db = need_b ? g.grad_buffer(bi).data() : nullptr;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t br = broadcast ? 0 : r;
      const double* x = av.data().data() + r * cols;
      const double* y = bv.data().data() + br * cols;
      double dot = 0.0, nx2 = 0.0, ny2 = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        dot += x[j] * y[j];
        nx2 += x[j] * x[j];
        ny2 += y[j] * y[j];
      }
      const double nx = std::sqrt(nx2);
      const double ny = std::sqrt(ny2);
      const double den = nx * ny + kCosineEps;
      // d/dx [dot / (|x||y| + eps)] = y/den - dot * |y| * x / (|x| den^2)
      const double g0 = up[r];
      const double cx = nx > 0.0 ? dot * ny / (nx * den * den) : 0.0;
      const double cy = ny > 0.0 ? dot * nx / (ny * den * den) : 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        if (da) da[r * cols + j] += g0 * (y[j] / den - cx * x[j]);
        if (db) db[br * cols + j] += g0 * (x[j] / den - cy * y[j]);
      }
    }
  });
}

Var row_dot(Var query, Var keys) {
  Graph& g = graph_of(query, keys, "row_dot");
  const Tensor& qv = query.value();
  const Tensor& kv = keys.value();
  if (kv.rank() != 3 || qv.rows() != kv.shape()[0] || qv.cols() != kv.cols()) {
    throw Error(errc::kShapeMismatch,
                "row_dot: " + shape_string(qv.shape()) + " vs " + shape_string(kv.shape()));
  }
  const std::size_t batch = kv.shape()[0];
  const std::size_t len = kv.shape()[1];
  const std::size_t dim = kv.cols();
  Tensor out({batch, len}, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* q = qv.data().data() + b * dim;
    for (std::size_t h = 0; h < len; ++h) {
      const double* k = kv.data().data() + (b * len + h) * dim;
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += q[j] * k[j];
      out[b * len + h] = acc;
    }
  }
  const int qi = query.id();
  const int ki = keys.id();
  return g.record(std::move(out), {qi, ki}, [qi, ki, batch, len, dim](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& qv = g.value(qi);
    const Tensor& kv = g.value(ki);
    double* dq = g.needs_grad(qi) ? g.grad_buffer(qi).data() : nullptr;
    double* dk = g.needs_grad(ki) ? g.grad_buffer(ki).data() : nullptr;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* q = qv.data().data() + b * dim;
      for (std::size_t h = 0; h < len; ++h) {
        const double gv = up[b * len + h];
        const double* k = kv.data().data() + (b * len + h) * dim;
        for (std::size_t j = 0; j < dim; ++j) {
          if (dq) dq[b * dim + j] += gv * k[j];
          if (dk) dk[(b * len + h) * dim + j] += gv * q[j];
        }
      }
    }
  });
}

Var weighted_sum(Var weights, Var values) {
  Graph& g = graph_of(weights, values, "weighted_sum");
  const Tensor& wv = weights.value();
  const Tensor& vv = values.value();
  if (vv.rank() != 3 || wv.size() != vv.shape()[0] * vv.shape()[1]) {
    throw Error(errc::kShapeMismatch,
                "weighted_sum: " + shape_string(wv.shape()) + " vs " + shape_string(vv.shape()));
  }
  const std::size_t batch = vv.shape()[0];
  const std::size_t len = vv.shape()[1];
  const std::size_t dim = vv.cols();
  Tensor out({batch, dim}, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    double* o = out.data().data() + b * dim;
    for (std::size_t h = 0; h < len; ++h) {
      const double w = wv[b * len + h];
      const double* v = vv.data().data() + (b * len + h) * dim;
      for (std::size_t j = 0; j < dim; ++j) o[j] += w * v[j];
    }
  }
  const int wi = weights.id();
  const int vi = values.id();
  return g.record(std::move(out), {wi, vi}, [wi, vi, batch, len, dim](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& wv = g.value(wi);
    const Tensor& vv = g.value(vi);
    double* dw = g.needs_grad(wi) ? g.grad_buffer(wi).data() : nullptr;
    double* dv = g.needs_grad(vi) ? g.grad_buffer(vi).data() : nullptr;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* gb = up.data() + b * dim;
      for (std::size_t h = 0; h < len; ++h) {
        const double w = wv[b * len + h];
        const double* v = vv.data().data() + (b * len + h) * dim;
        if (dw) {
          double acc = 0.0;
          for (std::size_t j = 0; j < dim; ++j) acc += gb[j] * v[j];
          dw[b * len + h] += acc;
        }
        if (dv) {
          for (std::size_t j = 0; j < dim; ++j) dv[(b * len + h) * dim + j] += w * gb[j];
        }
      }
    }
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double total = 0.0;
  for (double v : xv.values()) total += v;
  const int xi = x.id();
  return x.graph().record(Tensor::scalar(total), {xi}, [xi](Graph& g, int self) {
    const double up = g.grad(self)[0];
    for (double& d : g.grad_buffer(xi)) d += up;
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw Error(errc::kShapeMismatch, "mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var masked_mean(Var x, std::span<const std::uint8_t> mask) {
  const Tensor& xv = x.value();
  if (mask.size() != xv.size()) {
    throw Error(errc::kShapeMismatch, "masked_mean: mask has " + std::to_string(mask.size()) +
                                          " entries for " + std::to_string(xv.size()) + " values");
  }
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (mask[i]) {
      total += xv[i];
      ++count;
    }
  }
  const double inv = count ? 1.0 / static_cast<double>(count) : 0.0;
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  const int xi = x.id();
  return x.graph().record(Tensor::scalar(total * inv), {xi},
                          [xi, inv, m = std::move(m)](Graph& g, int self) {
                            const double up = g.grad(self)[0];
                            auto d = g.grad_buffer(xi);
                            for (std::size_t i = 0; i < m.size(); ++i) {
                              if (m[i]) d[i] += up * inv;
                            }
                          });
}

Var squared_error(Var a, Var b) {
  Graph& g = graph_of(a, b, "squared_error");
  require_same_shape(a.value(), b.value(), "squared_error");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = out[i] - bv[i];
    out[i] = e * e;
  }
  const int ai = a.id();
  const int bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& g, int self) {
    const auto up = g.grad(self);
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    if (g.needs_grad(ai)) {
      auto d = g.grad_buffer(ai);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i] * 2.0 * (av[i] - bv[i]);
    }
    if (g.needs_grad(bi)) {
      auto d = g.grad_buffer(bi);
      for (std::size_t i = 0; i < up.size(); ++i) d[i] -= up[i] * 2.0 * (av[i] - bv[i]);
    }
  });
}

Var binary_cross_entropy(Var p, std::span<const double> labels) {
  const Tensor& pv = p.value();
  if (labels.size() != pv.size() || pv.size() == 0) {
    throw Error(errc::kShapeMismatch, "binary_cross_entropy: " + std::to_string(labels.size()) +
                                          " labels for " + std::to_string(pv.size()) + " predictions");
  }
  const double inv = 1.0 / static_cast<double>(pv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    total += labels[i] * std::log(pv[i]) + (1.0 - labels[i]) * std::log(1.0 - pv[i]);
  }
  std::vector<double> y(labels.begin(), labels.end());
  const int pi = p.id();
  return p.graph().record(Tensor::scalar(-total * inv), {pi},
                          [pi, inv, y = std::move(y)](Graph& g, int self) {
                            const double up = g.grad(self)[0];
                            const Tensor& pv = g.value(pi);
                            auto d = g.grad_buffer(pi);
                            for (std::size_t i = 0; i < y.size(); ++i) {
                              d[i] -= up * inv * (y[i] / pv[i] - (1.0 - y[i]) / (1.0 - pv[i]));
                            }
                          });
}

}  // namespace msnet::ad
