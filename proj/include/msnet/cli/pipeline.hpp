// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msnet/cli/experiment.hpp"
#include "msnet/datagen/market.hpp"
#include "msnet/metrics/metrics.hpp"
#include "msnet/model/trainer.hpp"
#include "msnet/seqmodel/diagnostic.hpp"

namespace msnet::cli {

inline constexpr const char* kManifestFormat = "msnet-manifest/v1";
inline constexpr const char* kTrainFile = "train.tsv";
inline constexpr const char* kTestFile = "test.tsv";
inline constexpr const char* kManifestFile = "manifest.json";

struct Manifest {
  std::string generator_hash;
  std::string train_sha256;
  std::string test_sha256;
  std::string dataset_hash;  // derived from both file hashes
  std::uint64_t seed = 0;
  nlohmann::json generator;
  std::size_t train_records = 0;
  std::size_t test_records = 0;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

struct Dataset {
  std::vector<datagen::ImpressionRecord> train;  // all days but the last
  std::vector<datagen::ImpressionRecord> test;   // the last day
  Manifest manifest;
};

// Simulates the market and splits by day; the manifest hashes the exact
// bytes that write_dataset_dir produces.
Dataset generate_dataset(const ExperimentConfig& config);
void write_dataset_dir(const Dataset& dataset, const std::filesystem::path& dir, bool force);
Manifest read_manifest(const std::filesystem::path& dir);
// With verify, refuses files whose bytes or generator hash disagree with
// the manifest and the config.
Dataset read_dataset_dir(const std::filesystem::path& dir, const std::optional<std::string>& expected_generator_hash,
                         bool verify);

struct TrainResult {
  model::CtrModel model;
  std::vector<model::EpochLog> logs;
};

// Writes <name>.epochN.ckpt after every epoch and <name>.ckpt at the end
// when checkpoint_dir is set.
TrainResult train_model(const model::ModelConfig& config, const Dataset& dataset,
                        const std::optional<std::filesystem::path>& checkpoint_dir = {},
                        const std::string& name = "model");

metrics::PredictionFile evaluate_model(const model::CtrModel& model, const std::string& name, const Dataset& dataset,
                                       std::uint64_t partition_seed);

std::string render_attention_table(const seq::ScoreTable& table);
nlohmann::json attention_table_json(const seq::ScoreTable& table);

}  // namespace msnet::cli
