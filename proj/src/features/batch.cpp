// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/features/batch.hpp"

#include "msnet/common/error.hpp"

namespace msnet::features {

SampleBatch SampleBatch::take(std::span<const std::size_t> rows) const {
  SampleBatch out;
  out.batch_size = rows.size();
  out.max_len = max_len;
  const std::size_t h = max_len;
  for (std::size_t r : rows) {
    if (r >= batch_size) throw Error(errc::kIndexOutOfRange, "batch row " + std::to_string(r) + " out of range");
    out.target_item.push_back(target_item[r]);
    out.target_category.push_back(target_category[r]);
    out.seq_item.insert(out.seq_item.end(), seq_item.begin() + r * h, seq_item.begin() + (r + 1) * h);
    out.seq_category.insert(out.seq_category.end(), seq_category.begin() + r * h,
                            seq_category.begin() + (r + 1) * h);
    out.seq_mask.insert(out.seq_mask.end(), seq_mask.begin() + r * h, seq_mask.begin() + (r + 1) * h);
    out.seq_limited.insert(out.seq_limited.end(), seq_limited.begin() + r * h, seq_limited.begin() + (r + 1) * h);
    out.labels.push_back(labels[r]);
    out.is_new.push_back(is_new[r]);
    out.is_limited.push_back(is_limited[r]);
    out.user_id.push_back(user_id[r]);
    out.item_id.push_back(item_id[r]);
  }
  return out;
}

SampleBatch SampleBatch::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = begin; r < end && r < batch_size; ++r) rows.push_back(r);
  return take(rows);
}

SampleBatch encode_batch(std::span<const datagen::ImpressionRecord> records, const Vocabularies& vocabs,
                         std::size_t max_len) {
  if (max_len == 0) throw Error(errc::kInvalidArgument, "max history length must be at least 1");
  SampleBatch b;
  b.batch_size = records.size();
  b.max_len = max_len;
  const std::size_t n = records.size() * max_len;
  b.seq_item.assign(n, 0);
  b.seq_category.assign(n, 0);
  b.seq_mask.assign(n, 0);
  b.seq_limited.assign(n, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    b.target_item.push_back(vocabs.items.lookup(r.item_id));
    b.target_category.push_back(vocabs.categories.lookup(r.item_category_id));
    b.labels.push_back(static_cast<double>(r.label));
    b.is_new.push_back(r.item_is_new ? 1 : 0);
    b.is_limited.push_back(r.item_is_limited ? 1 : 0);
    b.user_id.push_back(r.user_id);
    b.item_id.push_back(r.item_id);
    // history is most recent first, so truncation keeps the prefix
    const std::size_t len = std::min(max_len, r.user_history.size());
    for (std::size_t k = 0; k < len; ++k) {
      const auto& h = r.user_history[k];
      const std::size_t at = i * max_len + k;
      b.seq_item[at] = vocabs.items.lookup(h.item_id);
      b.seq_category[at] = vocabs.categories.lookup(h.category_id);
      b.seq_mask[at] = 1;
      b.seq_limited[at] = h.is_limited ? 1 : 0;
    }
  }
  return b;
}

}  // namespace msnet::features
