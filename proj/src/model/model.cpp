// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/model/model.hpp"

#include "msnet/autodiff/init.hpp"
#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::model {

namespace {

constexpr std::size_t kPredictChunk = 1024;

std::mt19937_64 group_rng(std::uint64_t seed, std::string_view group) {
  std::uint64_t h = mix64(seed);
  for (char c : group) h = mix64(h ^ static_cast<unsigned char>(c));
  return std::mt19937_64(h);
}

}  // namespace

CtrModel::CtrModel(ModelConfig config, features::Vocabularies vocabs)
    : config_(std::move(config)), vocabs_(std::move(vocabs)) {
  config_.validate();
  init_params();
}

CtrModel::CtrModel(ModelConfig config, features::Vocabularies vocabs, ad::ParameterStore params)
    : config_(std::move(config)), vocabs_(std::move(vocabs)), params_(std::move(params)) {
  config_.validate();
}

seq::AttentionSpec CtrModel::attention(const std::string& prefix) const {
  return {prefix, config_.id_dim + config_.side_dim, config_.n_heads, config_.d_head};
}

seq::MetaSpec CtrModel::meta_spec() const {
  seq::MetaSpec m;
  m.id_dim = config_.id_dim;
  m.side_dim = config_.side_dim;
  m.hidden = config_.meta_hidden;
  if (config_.force_identity_scale) m.forced_scale = 1.0;
  m.force_original_id = config_.force_original_id;
  return m;
}

std::size_t CtrModel::mlp_input_dim() const {
  const std::size_t branches = config_.is_msnet() && config_.seq_split ? 2 : 1;
  return branches * config_.n_heads * config_.d_head + config_.id_dim + config_.side_dim;
}

// Each group draws from its own stream so parameters with the same name get
// the same initial values across architectures sharing a seed.
void CtrModel::init_params() {
  auto rng = group_rng(config_.seed, "emb");
  features::add_embedding_tables(params_, vocabs_, config_.id_dim, config_.side_dim, rng);
  std::vector<std::string> attn;
  if (config_.is_msnet() && config_.seq_split) {
    attn = {"attn_multi", "attn_limited"};
  } else {
    attn = {"attn"};
  }
  for (const auto& prefix : attn) {
    rng = group_rng(config_.seed, prefix);
    seq::add_attention_params(params_, attention(prefix), rng);
  }
  if (config_.is_msnet() && config_.seq_meta) {
    rng = group_rng(config_.seed, "meta");
    seq::add_meta_params(params_, meta_spec(), rng);
  }
  rng = group_rng(config_.seed, "mlp");
  std::size_t in = mlp_input_dim();
  std::vector<std::size_t> widths = config_.hidden;
  widths.push_back(1);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    params_.add("mlp.w" + std::to_string(i), ad::glorot_uniform(in, widths[i], rng));
    params_.add("mlp.b" + std::to_string(i), ad::Tensor({widths[i]}, 0.0));
    in = widths[i];
  }
}

features::SampleBatch CtrModel::encode(std::span<const datagen::ImpressionRecord> records) const {
  return features::encode_batch(records, vocabs_, config_.max_len);
}

ForwardResult CtrModel::forward(ad::Graph& g, const features::SampleBatch& batch, seq::ScoreTable* scores) const {
  if (batch.max_len != config_.max_len) {
    throw Error(errc::kShapeMismatch, "batch history length " + std::to_string(batch.max_len) +
                                          " does not match model max_len " + std::to_string(config_.max_len));
  }
  ForwardResult out;
  out.emb = features::embed(g, batch);
  const auto& e = out.emb;
  ad::Var target = features::item_embedding(e.target_id, e.target_side);
  ad::Var seq_item = features::item_embedding(e.seq_id, e.seq_side);
  const seq::MetaSpec meta = meta_spec();

  // Query and K/V with the meta networks applied, computed once on demand.
  ad::Var meta_q;
  seq::KeyValue meta_kv;
  auto with_meta = [&]() {
    if (!meta_q.valid()) {
      meta_q = ad::concat_cols({e.target_id, seq::meta_scale(e.target_id, e.target_side, meta)});
      meta_kv = seq::compose_kv(e.seq_id, e.seq_side, seq::meta_scale(e.seq_id, e.seq_side, meta),
                                seq::meta_shift(e.seq_side, e.seq_id, meta));
    }
  };
  seq::HeadScores head_scores;
  auto branch = [&](const std::string& prefix, const ad::Mask& mask, bool use_meta) {
    ad::Var res;
    if (use_meta) {
      with_meta();
      res = seq::target_attention(meta_q, meta_kv.key, meta_kv.value, mask, attention(prefix),
                                  scores ? &head_scores : nullptr);
    } else {
      res = seq::target_attention(target, seq_item, seq_item, mask, attention(prefix),
                                  scores ? &head_scores : nullptr);
    }
    if (scores) {
      for (const auto& s : head_scores) scores->add_head(s, batch, mask);
    }
    return res;
  };

  ad::Var mlp_in;
  if (!config_.is_msnet()) {
    mlp_in = ad::concat_cols({branch("attn", batch.seq_mask, false), target});
  } else if (config_.seq_split) {
    const seq::SplitMasks split = seq::split_sequence(batch);
    ad::Var multi = branch("attn_multi", split.multi, config_.seq_meta && config_.meta_on_multi);
    ad::Var limited = branch("attn_limited", split.limited, config_.seq_meta);
    mlp_in = ad::concat_cols({multi, limited, target});
  } else {
    mlp_in = ad::concat_cols({branch("attn", batch.seq_mask, config_.seq_meta), target});
  }

  ad::Var h = mlp_in;
  const std::size_t layers = config_.hidden.size() + 1;
  for (std::size_t i = 0; i < layers; ++i) {
    h = ad::add_bias(ad::matmul(h, g.parameter("mlp.w" + std::to_string(i))),
                     g.parameter("mlp.b" + std::to_string(i)));
    if (i + 1 < layers) h = ad::leaky_relu(h);
  }
  out.logit = ad::clamp(ad::reshape(h, {batch.batch_size}), -kLogitClamp, kLogitClamp);
  out.prob = ad::sigmoid(out.logit);
  return out;
}

ad::Mask aux_scope_mask(const features::SampleBatch& batch, AuxScope scope) {
  if (scope == AuxScope::kBoth) return batch.seq_mask;
  return seq::split_sequence(batch).limited;
}

ad::Var loss_ce(ad::Var prob, std::span<const double> labels) { return ad::binary_cross_entropy(prob, labels); }

ad::Var loss_aux(const features::ItemEmbeddings& emb, std::span<const std::uint8_t> scope) {
  const auto& ss = emb.seq_id.shape();
  const std::size_t rows = ss[0] * ss[1];
  auto flat = [rows](ad::Var x) { return ad::reshape(x, {rows, x.shape().back()}); };
  ad::Var t_side = flat(ad::repeat_rows(emb.target_side, ss[1]));
  ad::Var t_id = flat(ad::repeat_rows(emb.target_id, ss[1]));
  ad::Var side_sim = ad::stop_gradient(ad::cosine_sim_rows(flat(emb.seq_side), t_side));
  ad::Var id_sim = ad::cosine_sim_rows(flat(emb.seq_id), t_id);
  return ad::masked_mean(ad::squared_error(side_sim, id_sim), scope);
}

ad::Var total_loss(ad::Var ce, ad::Var aux, double alpha) {
  if (!aux.valid()) return ce;
  return ad::add(ce, ad::scale(aux, alpha));
}

Losses CtrModel::losses(ad::Graph& g, const features::SampleBatch& batch, const ForwardResult& fwd) const {
  Losses l;
  l.ce = loss_ce(fwd.prob, batch.labels);
  if (config_.aux_active()) {
    l.aux = loss_aux(fwd.emb, aux_scope_mask(batch, config_.aux_scope));
  }
  l.total = total_loss(l.ce, l.aux, config_.alpha);
  return l;
}

std::vector<double> CtrModel::predict_proba(const features::SampleBatch& batch) const {
  std::vector<double> out;
  out.reserve(batch.batch_size);
  for (std::size_t begin = 0; begin < batch.batch_size; begin += kPredictChunk) {
    const features::SampleBatch chunk = batch.slice(begin, begin + kPredictChunk);
    ad::Graph g(params_, false);
    const ForwardResult fwd = forward(g, chunk);
    const auto v = fwd.prob.value().values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void CtrModel::attention_scores(const features::SampleBatch& batch, seq::ScoreTable& table) const {
  for (std::size_t begin = 0; begin < batch.batch_size; begin += kPredictChunk) {
    const features::SampleBatch chunk = batch.slice(begin, begin + kPredictChunk);
    ad::Graph g(params_, false);
    forward(g, chunk, &table);
  }
}

std::vector<metrics::PredictionRecord> predict(const CtrModel& model,
                                               std::span<const datagen::ImpressionRecord> records,
                                               std::uint64_t partition_seed) {
  const features::SampleBatch batch = model.encode(records);
  const std::vector<double> p = model.predict_proba(batch);
  std::vector<metrics::PredictionRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out.push_back({r.user_id, r.item_id, p[i], r.label, r.item_is_new, r.item_is_limited,
                   metrics::partition_of(r.user_id, r.item_id, partition_seed)});
  }
  return out;
}

}  // namespace msnet::model
