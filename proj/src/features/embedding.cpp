// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/features/embedding.hpp"

#include <cmath>

namespace msnet::features {

namespace {

ad::Tensor uniform_table(std::size_t rows, std::size_t dim, std::mt19937_64& rng) {
  const double r = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-r, r);
  std::vector<double> v(rows * dim);
  for (double& x : v) x = dist(rng);
  return ad::Tensor({rows, dim}, std::move(v));
}

}  // namespace

void add_embedding_tables(ad::ParameterStore& params, const Vocabularies& vocabs, std::size_t id_dim,
                          std::size_t side_dim, std::mt19937_64& rng) {
  params.add(kItemIdTable, uniform_table(vocabs.items.rows(), id_dim, rng), true);
  params.add(kCategoryTable, uniform_table(vocabs.categories.rows(), side_dim, rng), true);
}

ItemEmbeddings embed(ad::Graph& graph, const SampleBatch& batch) {
  const std::size_t b = batch.batch_size;
  const std::size_t h = batch.max_len;
  ItemEmbeddings e;
  e.target_id = graph.gather_rows(kItemIdTable, batch.target_item);
  e.target_side = graph.gather_rows(kCategoryTable, batch.target_category);
  ad::Var sid = graph.gather_rows(kItemIdTable, batch.seq_item);
  ad::Var sside = graph.gather_rows(kCategoryTable, batch.seq_category);
  e.seq_id = ad::reshape(sid, {b, h, sid.shape().back()});
  e.seq_side = ad::reshape(sside, {b, h, sside.shape().back()});
  return e;
}

ad::Var item_embedding(ad::Var id, ad::Var side) { return ad::concat_cols({id, side}); }

}  // namespace msnet::features
