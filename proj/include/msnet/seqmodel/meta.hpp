// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <random>

#include "msnet/autodiff/graph.hpp"

namespace msnet::seq {

inline constexpr double kNormRatioEps = 1e-12;

// Two-layer nets: meta.scale.{w0,b0,w1,b1} maps D_id -> hidden -> D_side
// with a 2*sigmoid output; meta.shift.{w0,b0,w1,b1} maps D_side -> hidden
// -> D_id with a linear output.
struct MetaSpec {
  std::size_t id_dim = 8;
  std::size_t side_dim = 8;
  std::size_t hidden = 16;
  // Test and degeneracy overrides. A forced scale replaces the scaling
  // net's output with a constant; force_original_id makes the blend keep
  // the raw id embedding (v = 0).
  std::optional<double> forced_scale;
  bool force_original_id = false;
};

void add_meta_params(ad::ParameterStore& params, const MetaSpec& spec, std::mt19937_64& rng);

// Per-dimension weights in (0, 2) from the gradient-blocked id embedding.
ad::Var scale_weights(ad::Var id_emb, const MetaSpec& spec);

// weight(sg(id)) * side, elementwise. Works on [B, D] and [B, H, D].
ad::Var meta_scale(ad::Var id_emb, ad::Var side_emb, const MetaSpec& spec);

// Meta id from the gradient-blocked side embedding.
ad::Var meta_id(ad::Var side_emb, const MetaSpec& spec);

// v = |delta| / (|delta| + |id| + eps) per row; returns v*delta + (1-v)*id.
ad::Var norm_ratio_blend(ad::Var delta, ad::Var id_emb, ad::Var* ratio = nullptr);

ad::Var meta_shift(ad::Var side_emb, ad::Var id_emb, const MetaSpec& spec);

struct KeyValue {
  ad::Var key;    // concat(id, scaled side)
  ad::Var value;  // concat(shifted id, side)
};

KeyValue compose_kv(ad::Var id_emb, ad::Var side_emb, ad::Var scaled_side, ad::Var shifted_id);

}  // namespace msnet::seq
