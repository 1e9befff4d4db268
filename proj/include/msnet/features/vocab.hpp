// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "msnet/datagen/market.hpp"

namespace msnet::features {

// Dense index assignment in first-seen order. Index 0 is reserved for
// values never seen while building (out-of-vocabulary).
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;

  std::size_t add(std::int64_t value);
  std::size_t lookup(std::int64_t value) const;

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept { return values_.size() + 1; }
  // values()[k] is the raw value assigned index k + 1.
  const std::vector<std::int64_t>& values() const noexcept { return values_; }

  static Vocabulary from_values(std::span<const std::int64_t> values);
  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.values_ == b.values_; }

 private:
  std::vector<std::int64_t> values_;
  std::unordered_map<std::int64_t, std::size_t> index_;
};

struct Vocabularies {
  Vocabulary items;
  Vocabulary categories;
  friend bool operator==(const Vocabularies&, const Vocabularies&) = default;
};

// Built from training records only, so ids that first appear at test time
// map to the unknown row: the cold-start condition.
Vocabularies build_vocab(std::span<const datagen::ImpressionRecord> records);

}  // namespace msnet::features
