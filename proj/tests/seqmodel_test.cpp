// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "msnet/autodiff/gradcheck.hpp"
#include "msnet/common/error.hpp"
#include "msnet/features/embedding.hpp"
#include "msnet/seqmodel/attention.hpp"
#include "msnet/seqmodel/diagnostic.hpp"
#include "msnet/seqmodel/meta.hpp"
#include "checks.hpp"

namespace msnet::seq {
namespace {

using ad::Graph;
using ad::ParameterStore;
using ad::Tensor;
using ad::Var;

features::SampleBatch flags_batch(std::size_t b, std::size_t h, const ad::Mask& mask, const ad::Mask& limited) {
  features::SampleBatch batch;
  batch.batch_size = b;
  batch.max_len = h;
  batch.seq_mask = mask;
  batch.seq_limited = limited;
  batch.seq_item.assign(b * h, 0);
  batch.seq_category.assign(b * h, 0);
  batch.is_limited.assign(b, 0);
  return batch;
}

using checks::add_tables;
using checks::random_batch;

// --- split ---------------------------------------------------------------

TEST(SplitSequence, Example) {
  // flags [L, M, L, pad]
  auto b = flags_batch(1, 4, {1, 1, 1, 0}, {1, 0, 1, 0});
  SplitMasks m = split_sequence(b);
  EXPECT_EQ(m.limited, (ad::Mask{1, 0, 1, 0}));
  EXPECT_EQ(m.multi, (ad::Mask{0, 1, 0, 0}));
}

TEST(SplitSequence, AllLimitedGivesEmptyMultiAndZeroInterest) {
  auto b = flags_batch(1, 3, {1, 1, 1}, {1, 1, 1});
  SplitMasks m = split_sequence(b);
  EXPECT_EQ(m.multi, (ad::Mask{0, 0, 0}));
  ParameterStore p;
  std::mt19937_64 rng(2);
  AttentionSpec spec{"attn_multi", 3, 1, 2};
  add_attention_params(p, spec, rng);
  Graph g(p, false);
  Var q = g.constant(Tensor({1, 3}, {1, 2, 3}));
  Var kv = g.constant(Tensor({1, 3, 3}, 0.5));
  Var out = target_attention(q, kv, kv, m.multi, spec);
  EXPECT_EQ(out.value(), Tensor({1, 2}, 0.0));
}

TEST(SplitSequence, PartitionsValidityProperty) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    auto b = random_batch(rng, 1 + rng() % 8, 1 + rng() % 9, 20, 5);
    SplitMasks m = split_sequence(b);
    for (std::size_t k = 0; k < b.seq_mask.size(); ++k) {
      EXPECT_FALSE(m.multi[k] && m.limited[k]);
      EXPECT_EQ(m.multi[k] || m.limited[k], b.seq_mask[k] != 0);
    }
  }
}

// --- attention -----------------------------------------------------------

TEST(TargetAttention, SingleKeyReturnsCombinedValue) {
  ParameterStore p;
  std::mt19937_64 rng(3);
  AttentionSpec spec{"attn", 2, 1, 2};
  add_attention_params(p, spec, rng);
  Graph g(p, false);
  Var q = g.constant(Tensor({1, 2}, {0.3, -0.7}));
  Var kv = g.constant(Tensor({1, 1, 2}, {1.5, 2.0}));
  Var out = target_attention(q, kv, kv, ad::Mask{1}, spec);
  // combine(W^V v)
  const Tensor& wv = p.get("attn.v.h0").value;
  const Tensor& wo = p.get("attn.out").value;
  double proj[2];
  for (int j = 0; j < 2; ++j) proj[j] = 1.5 * wv.at(0, j) + 2.0 * wv.at(1, j);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(out.value()[j], proj[0] * wo.at(0, j) + proj[1] * wo.at(1, j), 1e-15);
  }
}

TEST(TargetAttention, IdenticalKeysSplitEvenly) {
  ParameterStore p;
  std::mt19937_64 rng(4);
  AttentionSpec spec{"attn", 2, 1, 2};
  add_attention_params(p, spec, rng);
  Graph g(p, false);
  HeadScores scores;
  Var q = g.constant(Tensor({1, 2}, {0.3, -0.7}));
  Var k = g.constant(Tensor({1, 2, 2}, {1.0, 2.0, 1.0, 2.0}));
  target_attention(q, k, k, ad::Mask{1, 1}, spec, &scores);
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_EQ(scores[0][0], scores[0][1]);
  Var w = ad::softmax_rows(g.constant(scores[0]));
  EXPECT_EQ(w.value()[0], 0.5);
  EXPECT_EQ(w.value()[1], 0.5);
}

TEST(TargetAttention, HandSetSingleHead) {
  // B=1, H=2, D=2; weights picked so every product is exact.
  ParameterStore p;
  p.add("attn.q.h0", Tensor({2, 2}, {1.0, 0.0, 0.0, 2.0}));
  p.add("attn.k.h0", Tensor({2, 2}, {1.0, 1.0, 0.0, 1.0}));
  p.add("attn.v.h0", Tensor({2, 2}, {0.5, 0.0, 0.0, 1.0}));
  p.add("attn.out", Tensor({2, 2}, {1.0, 0.0, 1.0, 1.0}));
  AttentionSpec spec{"attn", 2, 1, 2};
  Graph g(p, false);
  HeadScores scores;
  Var q = g.constant(Tensor({1, 2}, {1.0, 1.0}));
  Var k = g.constant(Tensor({1, 2, 2}, {1.0, 0.0, 0.0, 1.0}));
  Var v = g.constant(Tensor({1, 2, 2}, {2.0, 4.0, 6.0, 8.0}));
  Var out = target_attention(q, k, v, ad::Mask{1, 1}, spec, &scores);
  // q' = [1, 2]; k'_0 = [1, 1], k'_1 = [0, 1]; scores = [3, 2] / sqrt(2)
  const double s0 = 3.0 / std::sqrt(2.0), s1 = 2.0 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(scores[0][0], s0);
  EXPECT_DOUBLE_EQ(scores[0][1], s1);
  const double w0 = 1.0 / (1.0 + std::exp(s1 - s0)), w1 = 1.0 - w0;
  // v'_0 = [1, 4], v'_1 = [3, 8]
  const double a0 = w0 * 1.0 + w1 * 3.0, a1 = w0 * 4.0 + w1 * 8.0;
  // out = [a0 + a1, a1]
  EXPECT_NEAR(out.value()[0], a0 + a1, 1e-14);
  EXPECT_NEAR(out.value()[1], a1, 1e-14);
}

TEST(TargetAttention, ShapeMismatchIsError) {
  ParameterStore p;
  std::mt19937_64 rng(4);
  AttentionSpec spec{"attn", 2, 1, 2};
  add_attention_params(p, spec, rng);
  Graph g(p, false);
  Var q = g.constant(Tensor({1, 3}, 0.0));
  Var k = g.constant(Tensor({1, 2, 2}, 0.0));
  try {
    target_attention(q, k, k, ad::Mask{1, 1}, spec);
    FAIL() << "expected shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kShapeMismatch);
  }
}

TEST(TargetAttention, MultiHeadGradcheck) {
  ParameterStore p;
  std::mt19937_64 rng(8);
  AttentionSpec spec{"attn", 3, 2, 2};
  add_attention_params(p, spec, rng);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> qv(6), kv(2 * 4 * 3);
  for (double& x : qv) x = u(rng);
  for (double& x : kv) x = u(rng);
  p.add("x.q", Tensor({2, 3}, qv));
  p.add("x.k", Tensor({2, 4, 3}, kv));
  const ad::Mask mask{1, 1, 0, 0, 1, 1, 1, 1};
  auto report = ad::check_gradients(p, [&](Graph& g) {
    Var out = target_attention(g.parameter("x.q"), g.parameter("x.k"), g.parameter("x.k"), mask, spec);
    return ad::sum(ad::mul(out, out));
  });
  EXPECT_TRUE(report.passed()) << report.max_rel_error();
  EXPECT_LT(report.max_rel_error(), 1e-6);
}

// --- physical vs mask split ----------------------------------------------

TEST(PhysicalSplit, MatchesMaskSplitBitwise) {
  const auto r = checks::split_equivalence(11, 100);
  EXPECT_EQ(r.compared, 200u);
  EXPECT_EQ(r.identical, r.compared);
}

// --- meta scaling --------------------------------------------------------

struct MetaFixture {
  ParameterStore p;
  MetaSpec spec;
  MetaFixture() {
    std::mt19937_64 rng(21);
    spec.id_dim = 3;
    spec.side_dim = 2;
    spec.hidden = 4;
    add_meta_params(p, spec, rng);
    p.add("x.id", Tensor({2, 2, 3}, {0.1, -0.4, 0.9, 0.3, 0.2, -0.6, -0.8, 0.5, 0.05, 0.7, -0.2, 0.4}));
    p.add("x.side", Tensor({2, 2, 2}, {0.25, -0.5, 0.9, 0.1, -0.3, 0.6, 0.45, -0.75}));
  }
};

TEST(MetaScale, ForcedOnesIsIdentity) {
  MetaFixture f;
  f.spec.forced_scale = 1.0;
  Graph g(f.p, false);
  Var side = g.parameter("x.side");
  EXPECT_EQ(meta_scale(g.parameter("x.id"), side, f.spec).value(), side.value());
}

TEST(MetaScale, ForcedZerosAnnihilates) {
  MetaFixture f;
  f.spec.forced_scale = 0.0;
  Graph g(f.p, false);
  EXPECT_EQ(meta_scale(g.parameter("x.id"), g.parameter("x.side"), f.spec).value(), Tensor({2, 2, 2}, 0.0));
}

TEST(MetaScale, WeightsInOpenZeroTwo) {
  MetaFixture f;
  Graph g(f.p, false);
  Var w = scale_weights(g.parameter("x.id"), f.spec);
  EXPECT_EQ(w.shape(), (ad::Shape{2, 2, 2}));
  for (double x : w.value().values()) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 2.0);
  }
}

TEST(MetaScale, IdInputIsGradientBlocked) {
  MetaFixture f;
  auto loss = [&](Graph& g) { return ad::sum(ad::mul(meta_scale(g.parameter("x.id"), g.parameter("x.side"), f.spec),
                                                      g.constant(Tensor({2, 2, 2}, 1.5)))); };
  auto report = ad::check_gradients(f.p, loss);
  const auto& id = report.at("x.id");
  EXPECT_TRUE(id.blocked);  // finite differences see the path, the tape does not
  Graph g(f.p);
  auto grads = g.backward(loss(g));
  for (double x : grads.at("x.id").dense.values()) EXPECT_EQ(x, 0.0);
  EXPECT_LT(report.at("x.side").max_rel_error, 1e-6);
  EXPECT_LT(report.at("meta.scale.w0").max_rel_error, 1e-4);
}

// --- meta shifting -------------------------------------------------------

TEST(MetaShift, ZeroMetaIdKeepsOriginal) {
  ParameterStore p;
  Graph g(p, false);
  Var ratio;
  Var out = norm_ratio_blend(g.constant(Tensor({1, 2}, 0.0)), g.constant(Tensor({1, 2}, {0.4, -1.2})), &ratio);
  EXPECT_EQ(ratio.value()[0], 0.0);
  EXPECT_EQ(out.value(), Tensor({1, 2}, {0.4, -1.2}));
}

TEST(MetaShift, ZeroIdTakesMetaId) {
  ParameterStore p;
  Graph g(p, false);
  Var ratio;
  Var out = norm_ratio_blend(g.constant(Tensor({1, 2}, {0.6, 0.8})), g.constant(Tensor({1, 2}, 0.0)), &ratio);
  EXPECT_NEAR(ratio.value()[0], 1.0, 1e-11);
  EXPECT_NEAR(out.value()[0], 0.6, 1e-11);
  EXPECT_NEAR(out.value()[1], 0.8, 1e-11);
}

TEST(MetaShift, HandExample) {
  ParameterStore p;
  Graph g(p, false);
  Var ratio;
  Var out = norm_ratio_blend(g.constant(Tensor({1, 2}, {3.0, 0.0})), g.constant(Tensor({1, 2}, {0.0, 1.0})), &ratio);
  EXPECT_NEAR(ratio.value()[0], 0.75, 1e-12);
  EXPECT_NEAR(out.value()[0], 2.25, 1e-12);
  EXPECT_NEAR(out.value()[1], 0.25, 1e-12);
}

TEST(MetaShift, RatioBoundedAndMonotoneProperty) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3, 3);
  ParameterStore p;
  for (int round = 0; round < 300; ++round) {
    std::vector<double> d(4), e(4);
    for (double& x : d) x = u(rng);
    for (double& x : e) x = u(rng);
    Graph g(p, false);
    Var r1, r2, r3;
    norm_ratio_blend(g.constant(Tensor({1, 4}, d)), g.constant(Tensor({1, 4}, e)), &r1);
    std::vector<double> d_small = d, e_small = e;
    for (double& x : d_small) x *= 0.5;
    for (double& x : e_small) x *= 0.5;
    norm_ratio_blend(g.constant(Tensor({1, 4}, d_small)), g.constant(Tensor({1, 4}, e)), &r2);
    norm_ratio_blend(g.constant(Tensor({1, 4}, d)), g.constant(Tensor({1, 4}, e_small)), &r3);
    const double v = r1.value()[0];
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LT(r2.value()[0], v);  // shrinking the meta id lowers v
    EXPECT_GT(r3.value()[0], v);  // shrinking the raw id raises v
  }
}

TEST(MetaShift, SideInputIsGradientBlocked) {
  MetaFixture f;
  // the shifted id feeds the loss; side only reaches it through the meta net
  auto loss = [&](Graph& g) {
    Var out = meta_shift(g.parameter("x.side"), g.parameter("x.id"), f.spec);
    return ad::sum(ad::mul(out, out));
  };
  auto report = ad::check_gradients(f.p, loss);
  EXPECT_TRUE(report.at("x.side").blocked);
  Graph g(f.p);
  auto grads = g.backward(loss(g));
  for (double x : grads.at("x.side").dense.values()) EXPECT_EQ(x, 0.0);
  EXPECT_LT(report.at("x.id").max_rel_error, 1e-4);
  EXPECT_LT(report.at("meta.shift.w1").max_rel_error, 1e-4);
}

TEST(MetaShift, ForcedOriginalIdIsIdentity) {
  MetaFixture f;
  f.spec.force_original_id = true;
  Graph g(f.p, false);
  Var id = g.parameter("x.id");
  EXPECT_EQ(meta_shift(g.parameter("x.side"), id, f.spec).value(), id.value());
}

// --- K/V composition -----------------------------------------------------

TEST(ComposeKv, DegeneratesToItemEmbedding) {
  std::mt19937_64 rng(41);
  ParameterStore p;
  add_tables(p, 10, 4, 4, 4, rng);
  MetaSpec spec{4, 4, 8, 1.0, true};
  add_meta_params(p, spec, rng);
  auto b = random_batch(rng, 3, 5, 10, 4);
  Graph g(p, false);
  features::ItemEmbeddings e = features::embed(g, b);
  KeyValue kv = compose_kv(e.seq_id, e.seq_side, meta_scale(e.seq_id, e.seq_side, spec),
                           meta_shift(e.seq_side, e.seq_id, spec));
  Var item = features::item_embedding(e.seq_id, e.seq_side);
  EXPECT_EQ(kv.key.value(), item.value());
  EXPECT_EQ(kv.value.value(), item.value());
  EXPECT_EQ(kv.key.shape(), (ad::Shape{3, 5, 8}));
}

TEST(ComposeKv, HandSetLiteral) {
  ParameterStore p;
  Graph g(p, false);
  Var id = g.constant(Tensor({1, 1, 2}, {1.0, 2.0}));
  Var side = g.constant(Tensor({1, 1, 2}, {3.0, 4.0}));
  Var scaled = g.constant(Tensor({1, 1, 2}, {30.0, 40.0}));
  Var shifted = g.constant(Tensor({1, 1, 2}, {10.0, 20.0}));
  KeyValue kv = compose_kv(id, side, scaled, shifted);
  EXPECT_EQ(kv.key.value(), Tensor({1, 1, 4}, {1.0, 2.0, 30.0, 40.0}));
  EXPECT_EQ(kv.value.value(), Tensor({1, 1, 4}, {10.0, 20.0, 3.0, 4.0}));
}

// --- score table ---------------------------------------------------------

TEST(ScoreTable, BucketMeans) {
  ScoreTable t;
  t.add(kMulti, kMulti, 0.3);
  t.add(kMulti, kMulti, 0.4);
  t.add(kMulti, kLimited, 0.1);
  t.add(kMulti, kLimited, 0.24);
  t.add(kLimited, kMulti, 0.09);
  t.add(kLimited, kLimited, 0.07);
  EXPECT_NEAR(*t.mean(kMulti, kMulti), 0.35, 1e-15);
  EXPECT_NEAR(*t.mean(kMulti, kLimited), 0.17, 1e-15);
  EXPECT_NEAR(*t.mean(kLimited, kMulti), 0.09, 1e-15);
  EXPECT_NEAR(*t.mean(kLimited, kLimited), 0.07, 1e-15);
}

TEST(ScoreTable, IdenticalEmbeddingsGiveEqualCells) {
  ParameterStore p;
  p.add(features::kItemIdTable, Tensor({6, 2}, 0.5), true);
  p.add(features::kCategoryTable, Tensor({3, 2}, -0.25), true);
  std::mt19937_64 rng(51);
  AttentionSpec spec{"attn", 4, 2, 3};
  add_attention_params(p, spec, rng);
  auto b = random_batch(rng, 40, 6, 6, 3);
  Graph g(p, false);
  features::ItemEmbeddings e = features::embed(g, b);
  Var seq = features::item_embedding(e.seq_id, e.seq_side);
  HeadScores scores;
  target_attention(features::item_embedding(e.target_id, e.target_side), seq, seq, b.seq_mask, spec, &scores);
  ScoreTable t;
  for (const auto& s : scores) t.add_head(s, b, b.seq_mask);
  for (StockType a : {kMulti, kLimited}) {
    for (StockType c : {kMulti, kLimited}) {
      ASSERT_TRUE(t.mean(a, c).has_value());
      EXPECT_NEAR(*t.mean(a, c), *t.mean(kMulti, kMulti), 1e-14);
    }
  }
}

TEST(ScoreTable, SingleBucketLeavesOthersAbsent) {
  auto b = flags_batch(1, 3, {1, 1, 0}, {0, 0, 0});
  ScoreTable t;
  t.add_head(Tensor({1, 3}, {1.0, 2.0, 99.0}), b, b.seq_mask);
  EXPECT_DOUBLE_EQ(*t.mean(kMulti, kMulti), 1.5);
  EXPECT_FALSE(t.mean(kMulti, kLimited).has_value());
  EXPECT_FALSE(t.mean(kLimited, kMulti).has_value());
  EXPECT_FALSE(t.mean(kLimited, kLimited).has_value());
}

}  // namespace
}  // namespace msnet::seq
