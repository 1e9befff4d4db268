// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "msnet/autodiff/graph.hpp"
#include "msnet/datagen/market.hpp"
#include "msnet/features/batch.hpp"
#include "msnet/features/embedding.hpp"
#include "msnet/metrics/prediction.hpp"
#include "msnet/model/config.hpp"
#include "msnet/seqmodel/attention.hpp"
#include "msnet/seqmodel/diagnostic.hpp"
#include "msnet/seqmodel/meta.hpp"

namespace msnet::model {

inline constexpr double kLogitClamp = 15.0;

struct ForwardResult {
  ad::Var prob;   // [B]
  ad::Var logit;  // [B], clamped
  features::ItemEmbeddings emb;
};

struct Losses {
  ad::Var ce;
  ad::Var aux;    // invalid when the aux loss is inactive
  ad::Var total;
  double aux_value() const { return aux.valid() ? aux.value()[0] : 0.0; }
};

// DIN or MSNet over a shared parameter layout:
//   emb.item_id, emb.category          embedding tables
//   attn.*                              single attention (DIN, or MSNet without split)
//   attn_multi.*, attn_limited.*        split branches
//   meta.scale.*, meta.shift.*          meta networks (MSNet with seq_meta)
//   mlp.w<i>, mlp.b<i>                  prediction tower, last layer has 1 unit
class CtrModel {
 public:
  CtrModel(ModelConfig config, features::Vocabularies vocabs);
  CtrModel(ModelConfig config, features::Vocabularies vocabs, ad::ParameterStore params);

  const ModelConfig& config() const noexcept { return config_; }
  const features::Vocabularies& vocabs() const noexcept { return vocabs_; }
  ad::ParameterStore& params() noexcept { return params_; }
  const ad::ParameterStore& params() const noexcept { return params_; }

  features::SampleBatch encode(std::span<const datagen::ImpressionRecord> records) const;

  // When `scores` is given, collects pre-softmax attention scores of every
  // branch, bucketed by stock type.
  ForwardResult forward(ad::Graph& graph, const features::SampleBatch& batch,
                        seq::ScoreTable* scores = nullptr) const;
  Losses losses(ad::Graph& graph, const features::SampleBatch& batch, const ForwardResult& fwd) const;

  std::vector<double> predict_proba(const features::SampleBatch& batch) const;
  void attention_scores(const features::SampleBatch& batch, seq::ScoreTable& table) const;

  seq::MetaSpec meta_spec() const;

 private:
  void init_params();
  seq::AttentionSpec attention(const std::string& prefix) const;
  std::size_t mlp_input_dim() const;

  ModelConfig config_;
  features::Vocabularies vocabs_;
  ad::ParameterStore params_;
};

// Eq-style helpers, usable on any graph.
ad::Var loss_ce(ad::Var prob, std::span<const double> labels);
// Masked mean over in-scope positions of (sg(cos(t_side, s_side)) - cos(t_id, s_id))^2.
ad::Var loss_aux(const features::ItemEmbeddings& emb, std::span<const std::uint8_t> scope);
ad::Var total_loss(ad::Var ce, ad::Var aux, double alpha);

// In-scope positions for the aux loss.
ad::Mask aux_scope_mask(const features::SampleBatch& batch, AuxScope scope);

// One record per impression, in input order.
std::vector<metrics::PredictionRecord> predict(const CtrModel& model,
                                               std::span<const datagen::ImpressionRecord> records,
                                               std::uint64_t partition_seed);

}  // namespace msnet::model
