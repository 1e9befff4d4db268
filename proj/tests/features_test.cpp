// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "msnet/features/batch.hpp"
#include "msnet/features/embedding.hpp"
#include "msnet/features/vocab.hpp"

namespace msnet::features {
namespace {

using datagen::HistoryEntry;
using datagen::ImpressionRecord;

ImpressionRecord record(std::int64_t item, std::int64_t cat, std::vector<HistoryEntry> history) {
  ImpressionRecord r;
  r.day = 1;
  r.user_id = 5;
  r.item_id = item;
  r.item_category_id = cat;
  r.label = 1;
  r.true_ctr = 0.5;
  r.user_history = std::move(history);
  return r;
}

std::vector<HistoryEntry> history_of(std::size_t n) {
  std::vector<HistoryEntry> h;
  for (std::size_t k = 0; k < n; ++k) {
    h.push_back({static_cast<std::int64_t>(100 + k), static_cast<std::int64_t>(k % 3), k % 2 == 0});
  }
  return h;
}

TEST(Vocab, FirstSeenOrder) {
  const std::vector<std::int64_t> items{7, 9, 7};
  Vocabulary v = Vocabulary::from_values(items);
  EXPECT_EQ(v.lookup(7), 1u);
  EXPECT_EQ(v.lookup(9), 2u);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.rows(), 3u);
}

TEST(Vocab, UnseenMapsToUnknown) {
  const std::vector<std::int64_t> items{7, 9};
  Vocabulary v = Vocabulary::from_values(items);
  EXPECT_EQ(v.lookup(42), Vocabulary::kUnknown);
}

TEST(Vocab, TrainOnlyIdsAreColdAtTest) {
  std::vector<ImpressionRecord> train{record(1, 0, {}), record(2, 1, {{1, 0, true}})};
  Vocabularies v = build_vocab(train);
  std::vector<ImpressionRecord> test{record(3, 1, {{2, 1, false}})};
  SampleBatch b = encode_batch(test, v, 2);
  EXPECT_EQ(b.target_item[0], 0u);
  EXPECT_NE(b.target_category[0], 0u);
  EXPECT_EQ(b.seq_item[0], v.items.lookup(2));
  for (std::size_t idx : {v.items.lookup(1), v.items.lookup(2)}) EXPECT_NE(idx, 0u);
}

TEST(EncodeBatch, PaddingMask) {
  std::vector<ImpressionRecord> rs{record(1, 0, history_of(3))};
  Vocabularies v = build_vocab(rs);
  SampleBatch b = encode_batch(rs, v, 5);
  EXPECT_EQ(b.seq_mask, (ad::Mask{1, 1, 1, 0, 0}));
  for (std::size_t k = 3; k < 5; ++k) {
    EXPECT_EQ(b.seq_item[k], 0u);
    EXPECT_EQ(b.seq_category[k], 0u);
    EXPECT_EQ(b.seq_limited[k], 0);
  }
}

TEST(EncodeBatch, TruncatesToMostRecent) {
  std::vector<ImpressionRecord> rs{record(1, 0, history_of(8))};
  Vocabularies v = build_vocab(rs);
  SampleBatch b = encode_batch(rs, v, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(b.seq_item[k], v.items.lookup(100 + static_cast<std::int64_t>(k)));
    EXPECT_EQ(b.seq_mask[k], 1);
  }
}

TEST(EncodeBatch, EmptyHistory) {
  std::vector<ImpressionRecord> rs{record(1, 0, {})};
  Vocabularies v = build_vocab(rs);
  SampleBatch b = encode_batch(rs, v, 4);
  EXPECT_EQ(b.seq_item, (std::vector<std::size_t>(4, 0)));
  EXPECT_EQ(b.seq_mask, (ad::Mask(4, 0)));
}

TEST(EncodeBatch, InvariantsOnRandomRecords) {
  std::mt19937_64 rng(3);
  std::vector<ImpressionRecord> rs;
  for (int i = 0; i < 300; ++i) {
    std::vector<HistoryEntry> h;
    const std::size_t n = rng() % 12;
    for (std::size_t k = 0; k < n; ++k) {
      h.push_back({static_cast<std::int64_t>(rng() % 50), static_cast<std::int64_t>(rng() % 4), rng() % 2 == 0});
    }
    rs.push_back(record(static_cast<std::int64_t>(rng() % 60), static_cast<std::int64_t>(rng() % 4), h));
  }
  Vocabularies v = build_vocab(rs);
  const std::size_t H = 6;
  SampleBatch b = encode_batch(rs, v, H);
  ASSERT_EQ(b.seq_mask.size(), rs.size() * H);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t k = 0; k < H; ++k) {
      const std::size_t at = i * H + k;
      EXPECT_EQ(b.seq_mask[at] != 0, k < rs[i].user_history.size());
      if (!b.seq_mask[at]) {
        EXPECT_EQ(b.seq_item[at], 0u);
        EXPECT_EQ(b.seq_limited[at], 0);
      }
    }
  }
  // encoding is deterministic and slicing is consistent with re-encoding
  EXPECT_EQ(encode_batch(rs, v, H).seq_item, b.seq_item);
  SampleBatch s = b.slice(10, 20);
  SampleBatch direct = encode_batch(std::span(rs).subspan(10, 10), v, H);
  EXPECT_EQ(s.seq_item, direct.seq_item);
  EXPECT_EQ(s.seq_limited, direct.seq_limited);
  EXPECT_EQ(s.target_category, direct.target_category);
}

struct HandSet {
  ad::ParameterStore params;
  SampleBatch batch;
};

// Items 10, 20 and categories 1, 2; id table rows 0..2, category rows 0..2.
HandSet hand_set() {
  HandSet hs;
  std::vector<ImpressionRecord> rs{record(10, 1, {{20, 2, true}})};
  Vocabularies v = build_vocab(rs);
  hs.params.add(kItemIdTable, ad::Tensor({3, 2}, {0.0, 0.5, 1.0, 2.0, 3.0, 4.0}), true);
  hs.params.add(kCategoryTable, ad::Tensor({3, 2}, {-0.5, 0.25, 5.0, 6.0, 7.0, 8.0}), true);
  hs.batch = encode_batch(rs, v, 2);
  return hs;
}

TEST(Embed, HandSetConcatenation) {
  HandSet hs = hand_set();
  ad::Graph g(hs.params);
  ItemEmbeddings e = embed(g, hs.batch);
  ad::Var target = item_embedding(e.target_id, e.target_side);
  ad::Var seq = item_embedding(e.seq_id, e.seq_side);
  EXPECT_EQ(target.value(), ad::Tensor({1, 4}, {1.0, 2.0, 5.0, 6.0}));
  EXPECT_EQ(seq.shape(), (ad::Shape{1, 2, 4}));
  // position 0 is item 20 / category 2; position 1 is padding -> row 0
  EXPECT_EQ(seq.value(), ad::Tensor({1, 2, 4}, {3.0, 4.0, 7.0, 8.0, 0.0, 0.5, -0.5, 0.25}));
}

TEST(Embed, IdenticalItemsIdenticalRows) {
  std::vector<ImpressionRecord> rs{record(1, 0, {{4, 2, true}, {5, 1, false}, {4, 2, true}})};
  Vocabularies v = build_vocab(rs);
  ad::ParameterStore p;
  std::mt19937_64 rng(1);
  add_embedding_tables(p, v, 3, 2, rng);
  SampleBatch b = encode_batch(rs, v, 3);
  ad::Graph g(p);
  ItemEmbeddings e = embed(g, b);
  const auto& vals = item_embedding(e.seq_id, e.seq_side).value().values();
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(vals[c], vals[10 + c]);
}

TEST(Embed, InitRange) {
  std::vector<ImpressionRecord> rs{record(1, 0, history_of(5))};
  Vocabularies v = build_vocab(rs);
  ad::ParameterStore p;
  std::mt19937_64 rng(1);
  add_embedding_tables(p, v, 16, 4, rng);
  for (double x : p.get(kItemIdTable).value.values()) EXPECT_LE(std::abs(x), 0.25);
  for (double x : p.get(kCategoryTable).value.values()) EXPECT_LE(std::abs(x), 0.5);
  EXPECT_EQ(p.get(kItemIdTable).value.shape(), (ad::Shape{v.items.rows(), 16}));
  EXPECT_TRUE(p.get(kItemIdTable).sparse);
}

TEST(Embed, GradientSupportIsReferencedRows) {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 20; ++round) {
    std::vector<ImpressionRecord> rs;
    for (int i = 0; i < 6; ++i) {
      std::vector<HistoryEntry> h;
      const std::size_t n = rng() % 5;
      for (std::size_t k = 0; k < n; ++k) {
        h.push_back({static_cast<std::int64_t>(rng() % 30), static_cast<std::int64_t>(rng() % 5), false});
      }
      rs.push_back(record(static_cast<std::int64_t>(rng() % 30), static_cast<std::int64_t>(rng() % 5), h));
    }
    Vocabularies v = build_vocab(rs);
    ad::ParameterStore p;
    add_embedding_tables(p, v, 3, 3, rng);
    SampleBatch b = encode_batch(rs, v, 4);
    ad::Graph g(p);
    ItemEmbeddings e = embed(g, b);
    // Masked positions are excluded downstream; emulate with a masked mean.
    ad::Var seq = item_embedding(e.seq_id, e.seq_side);
    ad::Var pooled = ad::masked_mean(ad::norm_rows(seq), b.seq_mask);
    ad::Var loss = ad::add(pooled, ad::mean(item_embedding(e.target_id, e.target_side)));
    ad::GradMap gm = g.backward(loss);
    std::set<std::size_t> expect;
    for (std::size_t i = 0; i < b.batch_size; ++i) expect.insert(b.target_item[i]);
    for (std::size_t k = 0; k < b.seq_mask.size(); ++k) {
      if (b.seq_mask[k]) expect.insert(b.seq_item[k]);
    }
    const auto rows = gm.at(kItemIdTable).rows.nonzero_rows();
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()), expect);
  }
}

}  // namespace
}  // namespace msnet::features
