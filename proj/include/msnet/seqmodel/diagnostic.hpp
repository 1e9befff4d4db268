// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>

#include "msnet/autodiff/tensor.hpp"
#include "msnet/features/batch.hpp"

namespace msnet::seq {

enum StockType : int { kMulti = 0, kLimited = 1 };

// Mean pre-softmax attention score bucketed by (target stock type,
// sequence item stock type), averaged over valid positions and heads.
class ScoreTable {
 public:
  void add(StockType target, StockType item, double score);
  // scores [B x H] for one head; positions with mask 0 are skipped.
  void add_head(const ad::Tensor& scores, const features::SampleBatch& batch, std::span<const std::uint8_t> mask);
  std::optional<double> mean(StockType target, StockType item) const;
  std::size_t count(StockType target, StockType item) const { return n_[target][item]; }

 private:
  std::array<std::array<double, 2>, 2> sum_{};
  std::array<std::array<std::size_t, 2>, 2> n_{};
};

}  // namespace msnet::seq
