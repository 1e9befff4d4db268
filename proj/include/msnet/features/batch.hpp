// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msnet/autodiff/graph.hpp"
#include "msnet/datagen/market.hpp"
#include "msnet/features/vocab.hpp"

namespace msnet::features {

// Encoded impressions. Sequences are [B x H] row-major, most recent click
// first, right-padded. Padded positions carry index 0 and false flags.
struct SampleBatch {
  std::size_t batch_size = 0;
  std::size_t max_len = 0;

  std::vector<std::size_t> target_item;      // [B]
  std::vector<std::size_t> target_category;  // [B]
  std::vector<std::size_t> seq_item;         // [B*H]
  std::vector<std::size_t> seq_category;     // [B*H]
  ad::Mask seq_mask;                         // [B*H] valid positions
  ad::Mask seq_limited;                      // [B*H] limited-stock flag
  std::vector<double> labels;                // [B]
  ad::Mask is_new;                           // [B]
  ad::Mask is_limited;                       // [B]

  // Raw identifiers kept for prediction output.
  std::vector<std::int64_t> user_id;
  std::vector<std::int64_t> item_id;

  // Sub-batch made of the given rows, in the given order.
  SampleBatch take(std::span<const std::size_t> rows) const;
  SampleBatch slice(std::size_t begin, std::size_t end) const;
};

SampleBatch encode_batch(std::span<const datagen::ImpressionRecord> records, const Vocabularies& vocabs,
                         std::size_t max_len);

}  // namespace msnet::features
