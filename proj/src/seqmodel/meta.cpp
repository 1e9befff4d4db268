// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/seqmodel/meta.hpp"

#include "msnet/autodiff/init.hpp"

namespace msnet::seq {

namespace {

ad::Var two_layer(ad::Var x, const std::string& prefix) {
  ad::Graph& g = x.graph();
  ad::Var h = ad::leaky_relu(ad::add_bias(ad::matmul(x, g.parameter(prefix + ".w0")), g.parameter(prefix + ".b0")));
  return ad::add_bias(ad::matmul(h, g.parameter(prefix + ".w1")), g.parameter(prefix + ".b1"));
}

void add_two_layer(ad::ParameterStore& params, const std::string& prefix, std::size_t in, std::size_t hidden,
                   std::size_t out, std::mt19937_64& rng) {
  params.add(prefix + ".w0", ad::glorot_uniform(in, hidden, rng));
  params.add(prefix + ".b0", ad::Tensor({hidden}, 0.0));
  params.add(prefix + ".w1", ad::glorot_uniform(hidden, out, rng));
  params.add(prefix + ".b1", ad::Tensor({out}, 0.0));
}

}  // namespace

void add_meta_params(ad::ParameterStore& params, const MetaSpec& spec, std::mt19937_64& rng) {
  add_two_layer(params, "meta.scale", spec.id_dim, spec.hidden, spec.side_dim, rng);
  add_two_layer(params, "meta.shift", spec.side_dim, spec.hidden, spec.id_dim, rng);
}

ad::Var scale_weights(ad::Var id_emb, const MetaSpec& spec) {
  if (spec.forced_scale) {
    ad::Shape shape = id_emb.shape();
    shape.back() = spec.side_dim;
    return id_emb.graph().constant(ad::Tensor(shape, *spec.forced_scale));
  }
  return ad::scale(ad::sigmoid(two_layer(ad::stop_gradient(id_emb), "meta.scale")), 2.0);
}

ad::Var meta_scale(ad::Var id_emb, ad::Var side_emb, const MetaSpec& spec) {
  return ad::mul(scale_weights(id_emb, spec), side_emb);
}

ad::Var meta_id(ad::Var side_emb, const MetaSpec& spec) {
  return two_layer(ad::stop_gradient(side_emb), "meta.shift");
}

ad::Var norm_ratio_blend(ad::Var delta, ad::Var id_emb, ad::Var* ratio) {
  ad::Var nd = ad::norm_rows(delta);
  ad::Var ni = ad::norm_rows(id_emb);
  ad::Var v = ad::div(nd, ad::add_scalar(ad::add(nd, ni), kNormRatioEps));
  if (ratio) *ratio = v;
  return ad::blend_rows(v, delta, id_emb);
}

ad::Var meta_shift(ad::Var side_emb, ad::Var id_emb, const MetaSpec& spec) {
  if (spec.force_original_id) return id_emb;
  return norm_ratio_blend(meta_id(side_emb, spec), id_emb);
}

KeyValue compose_kv(ad::Var id_emb, ad::Var side_emb, ad::Var scaled_side, ad::Var shifted_id) {
  return {ad::concat_cols({id_emb, scaled_side}), ad::concat_cols({shifted_id, side_emb})};
}

}  // namespace msnet::seq
