// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msnet::metrics {

inline constexpr std::size_t kPartitions = 10;

struct PredictionRecord {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  double p = 0.0;
  int y = 0;
  bool is_new = false;
  bool is_limited = false;
  int partition_id = 0;
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// Seeded hash of (user_id, item_id) mod kPartitions.
int partition_of(std::int64_t user_id, std::int64_t item_id, std::uint64_t seed);

// Provenance carried in the prediction file header.
struct PredictionMeta {
  std::string model;        // "din" or "msnet"
  std::string config_hash;
  std::string dataset_hash;
  friend bool operator==(const PredictionMeta&, const PredictionMeta&) = default;
};

struct PredictionFile {
  PredictionMeta meta;
  std::vector<PredictionRecord> records;
};

inline constexpr const char* kPredictionFormat = "#format=msnet-predictions/v1";

std::string format_predictions(const PredictionFile& file);
PredictionFile parse_predictions(const std::string& text, const std::string& source);
void write_predictions(const PredictionFile& file, const std::filesystem::path& path);
PredictionFile read_predictions(const std::filesystem::path& path);

}  // namespace msnet::metrics
