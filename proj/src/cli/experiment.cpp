// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/cli/experiment.hpp"

#include <algorithm>
#include <set>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"
#include "msnet/datagen/config_json.hpp"

namespace msnet::cli {

std::vector<Variant> standard_variants() {
  return {
      {"base", model::Arch::kDin, false, false, false, {}},
      {"no_seq_split", model::Arch::kMsnet, false, true, true, {}},
      {"no_seq_meta", model::Arch::kMsnet, true, false, true, {}},
      {"no_aux_loss", model::Arch::kMsnet, true, true, false, {}},
      {"full", model::Arch::kMsnet, true, true, true, {}},
  };
}

Variant variant_by_name(const std::string& name) {
  for (const auto& v : standard_variants()) {
    if (v.name == name) return v;
  }
  throw Error(errc::kInvalidConfig, "unknown ablation variant '" + name +
                                        "' (expected base, no_seq_split, no_seq_meta, no_aux_loss, full)");
}

model::ModelConfig apply(const Variant& variant, model::ModelConfig config) {
  config.arch = variant.arch;
  config.seq_split = variant.seq_split;
  config.seq_meta = variant.seq_meta;
  config.aux_loss = variant.aux_loss;
  if (variant.alpha) config.alpha = *variant.alpha;
  if (variant.arch == model::Arch::kDin) {
    // switches are meaningless for DIN; keep its config hash canonical
    const model::ModelConfig defaults;
    config.seq_split = defaults.seq_split;
    config.seq_meta = defaults.seq_meta;
    config.aux_loss = defaults.aux_loss;
  }
  return config;
}

void ExperimentConfig::validate() const {
  generator.validate();
  model.validate();
  if (paths.dataset.empty() || paths.checkpoints.empty() || paths.reports.empty()) {
    throw Error(errc::kInvalidConfig, "paths.dataset, paths.checkpoints and paths.reports must be non-empty");
  }
  for (const auto& p : {paths.dataset, paths.checkpoints, paths.reports}) {
    if (std::filesystem::exists(p) && !std::filesystem::is_directory(p)) {
      throw Error(errc::kInvalidConfig, "path '" + p.string() + "' exists and is not a directory");
    }
  }
  if (generator.days < 2) throw Error(errc::kInvalidConfig, "generator.days must be >= 2 (train days + test day)");
  std::set<std::string> seen;
  for (const auto& name : ablation) {
    variant_by_name(name);
    if (!seen.insert(name).second) throw Error(errc::kInvalidConfig, "ablation variant '" + name + "' listed twice");
  }
  for (double a : alpha_sweep) {
    if (!(a >= 0.0)) throw Error(errc::kInvalidConfig, "alpha_sweep entries must be >= 0");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["partition_seed"] = partition_seed;
  j["generator"] = generator;
  auto m = model.to_json();
  m.erase("seed");
  j["model"] = m;
  j["paths"] = {{"dataset", paths.dataset.string()},
                {"checkpoints", paths.checkpoints.string()},
                {"reports", paths.reports.string()}};
  j["ablation"] = ablation;
  j["alpha_sweep"] = alpha_sweep;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "experiment config must be an object");
  static const std::set<std::string> known{"seed", "partition_seed", "generator", "model", "paths", "ablation",
                                           "alpha_sweep"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(errc::kInvalidConfig, "experiment config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("partition_seed")) c.partition_seed = j.at("partition_seed").get<std::uint64_t>();
    if (j.contains("generator")) c.generator = datagen::generator_config_from_json(j.at("generator"));
    if (j.contains("model")) {
      if (j.at("model").contains("seed")) {
        throw Error(errc::kInvalidConfig, "model.seed is not configurable; use the top-level seed");
      }
      c.model = model::ModelConfig::from_json(j.at("model"));
    }
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      if (!p.is_object()) throw Error(errc::kInvalidConfig, "paths must be an object");
      for (const auto& [key, _] : p.items()) {
        if (key != "dataset" && key != "checkpoints" && key != "reports") {
          throw Error(errc::kInvalidConfig, "paths: unknown key '" + key + "'");
        }
      }
      if (p.contains("dataset")) c.paths.dataset = p.at("dataset").get<std::string>();
      if (p.contains("checkpoints")) c.paths.checkpoints = p.at("checkpoints").get<std::string>();
      if (p.contains("reports")) c.paths.reports = p.at("reports").get<std::string>();
    }
    if (j.contains("ablation")) c.ablation = j.at("ablation").get<std::vector<std::string>>();
    if (j.contains("alpha_sweep")) c.alpha_sweep = j.at("alpha_sweep").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("experiment config: ") + e.what());
  }
  c.model.seed = c.seed;
  c.validate();
  return c;
}

model::ModelConfig ExperimentConfig::model_for(model::Arch arch) const {
  model::ModelConfig m = model;
  m.arch = arch;
  m.seed = seed;
  return m;
}

std::string ExperimentConfig::generator_hash() const {
  const nlohmann::json j{{"generator", generator}, {"seed", seed}};
  return short_hash(j.dump());
}

ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, std::string("experiment config: ") + e.what());
  }
  ExperimentConfig c = ExperimentConfig::from_json(j);
  if (!base_dir.empty()) {
    for (auto* p : {&c.paths.dataset, &c.paths.checkpoints, &c.paths.reports}) {
      if (p->is_relative()) *p = base_dir / *p;
    }
  }
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_file(path), path.parent_path());
}

std::string default_config_text() {
  return R"(// MSNet lab experiment config. JSON with comments; every key is optional
// and falls back to the value shown here. Relative paths resolve against
// the directory containing this file.
{
  // Drives market generation and model initialization.
  "seed": 1,
  // Seeds the hash that assigns impressions to the 10 evaluation partitions.
  "partition_seed": 7,

  "generator": {
    "n_users": 2000,
    "n_items": 10000,               // initial catalog
    "n_categories": 8,
    "days": 8,                      // days 1-7 train, day 8 test
    "limited_fraction": 0.7,        // share of items with stock 1
    "min_multi": 2,                 // stock range of multi-stock items
    "max_multi": 50,
    // true_ctr = sigmoid(bias + w_aff * preference[category] + w_q * quality)
    "bias": -2.5,
    "w_aff": 3.0,
    "w_q": 1.5,
    "purchase_given_click": 0.5,    // a clicked limited item sells with this probability
    "new_item_rate": 1000,          // listings per day
    "activity_mean": 12.5,          // impressions per user per day
    "exploration": 0.2,             // share of uniformly sampled impressions
    "affinity_temperature": 4.0,
    "preference_concentration": 0.3,
    "category_quality_spread": 0.5,
    "item_quality_noise": 0.5,
    "max_history": 20,
    "initial_age_days": 14
  },

  "model": {
    "arch": "msnet",                // din | msnet; --arch overrides
    "id_dim": 8,
    "side_dim": 8,
    "max_len": 20,                  // production: 50
    "n_heads": 2,
    "d_head": 8,                    // production hidden size: 128
    "hidden": [64, 32, 16],         // production: [512, 256, 128]
    "meta_hidden": 16,
    "alpha": 0.1,                   // auxiliary loss weight
    "learning_rate": 0.01,          // production: 1e-4
    "adagrad_decay": 1.0,           // accumulator decay; 1 is plain Adagrad
    "batch_size": 256,              // production: 4096
    "epochs": 2,
    "aux_scope": "limited_only",    // limited_only | both
    "seq_split": true,
    "seq_meta": true,
    "aux_loss": true,
    "meta_on_multi": false,         // also apply the meta modules to the multi-stock branch
    "force_identity_scale": false,  // diagnostics: scaling weights fixed to 1
    "force_original_id": false      // diagnostics: shifting returns the raw id embedding
  },

  "paths": {
    "dataset": "data",
    "checkpoints": "checkpoints",
    "reports": "reports"
  },

  // Rows of the ablation table, in order. Variants: base (DIN),
  // no_seq_split, no_seq_meta, no_aux_loss, full.
  "ablation": ["base", "no_seq_split", "no_seq_meta", "no_aux_loss", "full"],
  // Full MSNet is also trained once per alpha listed here.
  "alpha_sweep": [0.01, 0.1, 1.0]
}
)";
}

}  // namespace msnet::cli
