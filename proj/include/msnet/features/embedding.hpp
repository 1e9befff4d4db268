// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "msnet/autodiff/graph.hpp"
#include "msnet/features/batch.hpp"

namespace msnet::features {

// Target and sequence items share one id table and one category table.
inline constexpr const char* kItemIdTable = "emb.item_id";
inline constexpr const char* kCategoryTable = "emb.category";

// Adds both tables with rows drawn from uniform(-r, r), r = 1/sqrt(dim).
void add_embedding_tables(ad::ParameterStore& params, const Vocabularies& vocabs, std::size_t id_dim,
                          std::size_t side_dim, std::mt19937_64& rng);

struct ItemEmbeddings {
  ad::Var target_id;    // [B, D_id]
  ad::Var target_side;  // [B, D_side]
  ad::Var seq_id;       // [B, H, D_id]
  ad::Var seq_side;     // [B, H, D_side]
};

ItemEmbeddings embed(ad::Graph& graph, const SampleBatch& batch);

// Concatenation of an item's id and side embeddings along the last axis.
ad::Var item_embedding(ad::Var id, ad::Var side);

}  // namespace msnet::features
