// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/seqmodel/attention.hpp"

#include <cmath>

#include "msnet/autodiff/init.hpp"
#include "msnet/common/error.hpp"

namespace msnet::seq {

SplitMasks split_sequence(const features::SampleBatch& batch) {
  SplitMasks m;
  const std::size_t n = batch.seq_mask.size();
  m.multi.assign(n, 0);
  m.limited.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!batch.seq_mask[k]) continue;
    if (batch.seq_limited[k]) {
      m.limited[k] = 1;
    } else {
      m.multi[k] = 1;
    }
  }
  return m;
}

PhysicalSplit physical_split(const features::SampleBatch& batch, const ad::Mask& keep) {
  const std::size_t h = batch.max_len;
  PhysicalSplit out;
  out.seq_item.assign(batch.seq_item.size(), 0);
  out.seq_category.assign(batch.seq_category.size(), 0);
  out.mask.assign(batch.seq_mask.size(), 0);
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    std::size_t next = b * h;
    for (std::size_t k = b * h; k < (b + 1) * h; ++k) {
      if (!keep[k]) continue;
      out.seq_item[next] = batch.seq_item[k];
      out.seq_category[next] = batch.seq_category[k];
      out.mask[next] = 1;
      ++next;
    }
  }
  return out;
}

void add_attention_params(ad::ParameterStore& params, const AttentionSpec& spec, std::mt19937_64& rng) {
  if (spec.n_heads == 0 || spec.d_head == 0 || spec.input_dim == 0) {
    throw Error(errc::kInvalidConfig, "attention '" + spec.prefix + "' needs positive sizes");
  }
  for (std::size_t h = 0; h < spec.n_heads; ++h) {
    for (const char* which : {"q", "k", "v"}) {
      params.add(spec.prefix + "." + which + ".h" + std::to_string(h),
                 ad::glorot_uniform(spec.input_dim, spec.d_head, rng));
    }
  }
  params.add(spec.prefix + ".out", ad::glorot_uniform(spec.output_dim(), spec.output_dim(), rng));
}

ad::Var target_attention(ad::Var query, ad::Var keys, ad::Var values, std::span<const std::uint8_t> mask,
                         const AttentionSpec& spec, HeadScores* scores) {
  const auto& qs = query.shape();
  const auto& ks = keys.shape();
  if (qs.size() != 2 || ks.size() != 3 || values.shape() != ks || ks[0] != qs[0] || ks[2] != qs[1] ||
      qs[1] != spec.input_dim || mask.size() != ks[0] * ks[1]) {
    throw Error(errc::kShapeMismatch, "target_attention '" + spec.prefix + "': query " + ad::shape_string(qs) +
                                          ", keys " + ad::shape_string(ks) + ", values " +
                                          ad::shape_string(values.shape()) + ", mask " +
                                          std::to_string(mask.size()));
  }
  ad::Graph& g = query.graph();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.d_head));
  std::vector<ad::Var> heads;
  if (scores) scores->clear();
  for (std::size_t h = 0; h < spec.n_heads; ++h) {
    const std::string suffix = ".h" + std::to_string(h);
    ad::Var q = ad::matmul(query, g.parameter(spec.prefix + ".q" + suffix));
    ad::Var k = ad::matmul(keys, g.parameter(spec.prefix + ".k" + suffix));
    ad::Var v = ad::matmul(values, g.parameter(spec.prefix + ".v" + suffix));
    ad::Var s = ad::scale(ad::row_dot(q, k), inv_sqrt_d);
    if (scores) scores->push_back(s.value());
    heads.push_back(ad::weighted_sum(ad::softmax_rows(s, mask), v));
  }
  ad::Var joined = heads.size() == 1 ? heads.front() : ad::concat_cols(std::span<const ad::Var>(heads));
  return ad::matmul(joined, g.parameter(spec.prefix + ".out"));
}

}  // namespace msnet::seq
