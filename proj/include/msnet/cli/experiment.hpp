// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msnet/datagen/market.hpp"
#include "msnet/model/config.hpp"

namespace msnet::cli {

// One row of the ablation table: a named set of switch overrides on top of
// the experiment's model config.
struct Variant {
  std::string name;
  model::Arch arch = model::Arch::kMsnet;
  bool seq_split = true;
  bool seq_meta = true;
  bool aux_loss = true;
  std::optional<double> alpha;  // overrides the model's alpha when set
};

// The full grid in table order: base, w/o seq-split, w/o seq-meta, w/o aux, full.
std::vector<Variant> standard_variants();
Variant variant_by_name(const std::string& name);
model::ModelConfig apply(const Variant& variant, model::ModelConfig config);

struct Paths {
  std::filesystem::path dataset = "data";
  std::filesystem::path checkpoints = "checkpoints";
  std::filesystem::path reports = "reports";
};

struct ExperimentConfig {
  std::uint64_t seed = 1;             // drives the generator and model init
  std::uint64_t partition_seed = 7;   // evaluation partitions
  datagen::GeneratorConfig generator;
  model::ModelConfig model;           // model.seed is overwritten by seed
  Paths paths;
  std::vector<std::string> ablation{"base", "no_seq_split", "no_seq_meta", "no_aux_loss", "full"};
  std::vector<double> alpha_sweep{0.01, 0.1, 1.0};

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  model::ModelConfig model_for(model::Arch arch) const;
  // Identifies the dataset this config would generate.
  std::string generator_hash() const;
};

// Parses JSON with // and /* */ comments; relative paths are resolved
// against the config file's directory.
ExperimentConfig load_experiment(const std::filesystem::path& path);
ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir = {});

// The commented default config written to configs/default.jsonc.
std::string default_config_text();

}  // namespace msnet::cli
