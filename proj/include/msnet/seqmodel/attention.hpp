// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "msnet/autodiff/graph.hpp"
#include "msnet/features/batch.hpp"

namespace msnet::seq {

struct SplitMasks {
  ad::Mask multi;    // [B*H] valid and multi-stock
  ad::Mask limited;  // [B*H] valid and limited-stock
};

SplitMasks split_sequence(const features::SampleBatch& batch);

// Compacts the positions selected by `keep` to the front of each row and
// pads the rest, so a branch can run on its own dense sequence. Returned
// index vectors replace seq_item / seq_category; the mask is the new
// validity mask.
struct PhysicalSplit {
  std::vector<std::size_t> seq_item;
  std::vector<std::size_t> seq_category;
  ad::Mask mask;
};
PhysicalSplit physical_split(const features::SampleBatch& batch, const ad::Mask& keep);

// Parameters are <prefix>.q.h<i>, <prefix>.k.h<i>, <prefix>.v.h<i>, each
// [input_dim x d_head], and <prefix>.out [n_heads*d_head x n_heads*d_head].
struct AttentionSpec {
  std::string prefix;
  std::size_t input_dim = 0;
  std::size_t n_heads = 2;
  std::size_t d_head = 8;
  std::size_t output_dim() const { return n_heads * d_head; }
};

void add_attention_params(ad::ParameterStore& params, const AttentionSpec& spec, std::mt19937_64& rng);

// Pre-softmax scores q.k/sqrt(d_head), one [B x H] tensor per head.
using HeadScores = std::vector<ad::Tensor>;

// query [B, D], keys/values [B, H, D], mask [B*H]. Rows with no valid
// position produce a zero vector.
ad::Var target_attention(ad::Var query, ad::Var keys, ad::Var values, std::span<const std::uint8_t> mask,
                         const AttentionSpec& spec, HeadScores* scores = nullptr);

}  // namespace msnet::seq
