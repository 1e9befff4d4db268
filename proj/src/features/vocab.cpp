// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/features/vocab.hpp"

namespace msnet::features {

std::size_t Vocabulary::add(std::int64_t value) {
  auto [it, inserted] = index_.try_emplace(value, values_.size() + 1);
  if (inserted) values_.push_back(value);
  return it->second;
}

std::size_t Vocabulary::lookup(std::int64_t value) const {
  auto it = index_.find(value);
  return it == index_.end() ? kUnknown : it->second;
}

Vocabulary Vocabulary::from_values(std::span<const std::int64_t> values) {
  Vocabulary v;
  for (std::int64_t x : values) v.add(x);
  return v;
}

Vocabularies build_vocab(std::span<const datagen::ImpressionRecord> records) {
  Vocabularies v;
  for (const auto& r : records) {
    v.items.add(r.item_id);
    v.categories.add(r.item_category_id);
    for (const auto& h : r.user_history) {
      v.items.add(h.item_id);
      v.categories.add(h.category_id);
    }
  }
  return v;
}

}  // namespace msnet::features
