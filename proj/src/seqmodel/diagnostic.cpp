// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/seqmodel/diagnostic.hpp"

#include "msnet/common/error.hpp"

namespace msnet::seq {

void ScoreTable::add(StockType target, StockType item, double score) {
  sum_[target][item] += score;
  ++n_[target][item];
}

void ScoreTable::add_head(const ad::Tensor& scores, const features::SampleBatch& batch,
                          std::span<const std::uint8_t> mask) {
  const std::size_t h = batch.max_len;
  if (scores.size() != batch.batch_size * h || mask.size() != scores.size()) {
    throw Error(errc::kShapeMismatch, "score table: scores " + ad::shape_string(scores.shape()) +
                                          " do not match batch " + std::to_string(batch.batch_size) + "x" +
                                          std::to_string(h));
  }
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    const StockType t = batch.is_limited[b] ? kLimited : kMulti;
    for (std::size_t k = 0; k < h; ++k) {
      const std::size_t at = b * h + k;
      if (!mask[at]) continue;
      add(t, batch.seq_limited[at] ? kLimited : kMulti, scores[at]);
    }
  }
}

std::optional<double> ScoreTable::mean(StockType target, StockType item) const {
  if (n_[target][item] == 0) return std::nullopt;
  return sum_[target][item] / static_cast<double>(n_[target][item]);
}

}  // namespace msnet::seq
