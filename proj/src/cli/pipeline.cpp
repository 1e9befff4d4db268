// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/cli/pipeline.hpp"

#include <cstdio>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"
#include "msnet/datagen/config_json.hpp"
#include "msnet/datagen/dataset_io.hpp"
#include "msnet/features/vocab.hpp"
#include "msnet/model/checkpoint.hpp"

namespace msnet::cli {

namespace fs = std::filesystem;

nlohmann::json Manifest::to_json() const {
  return {{"format", kManifestFormat},
          {"generator_hash", generator_hash},
          {"dataset_hash", dataset_hash},
          {"seed", seed},
          {"generator", generator},
          {"new_item_definition", datagen::new_item_definition()},
          {"files",
           {{"train", {{"path", kTrainFile}, {"sha256", train_sha256}, {"records", train_records}}},
            {"test", {{"path", kTestFile}, {"sha256", test_sha256}, {"records", test_records}}}}}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kManifestFormat) {
      throw Error(errc::kVersion, "manifest format '" + j.at("format").get<std::string>() + "', expected '" +
                                      kManifestFormat + "'");
    }
    Manifest m;
    m.generator_hash = j.at("generator_hash").get<std::string>();
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.generator = j.at("generator");
    m.train_sha256 = j.at("files").at("train").at("sha256").get<std::string>();
    m.train_records = j.at("files").at("train").at("records").get<std::size_t>();
    m.test_sha256 = j.at("files").at("test").at("sha256").get<std::string>();
    m.test_records = j.at("files").at("test").at("records").get<std::size_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, std::string("manifest: ") + e.what());
  }
}

namespace {

std::string dataset_hash_of(const std::string& train_sha, const std::string& test_sha) {
  return short_hash(train_sha + ":" + test_sha);
}

}  // namespace

Dataset generate_dataset(const ExperimentConfig& config) {
  const auto& gc = config.generator;
  auto market = datagen::build_market(gc, config.seed);
  auto sim = datagen::simulate(market, gc.days, datagen::ImpressionPolicy::from(gc));
  Dataset d;
  for (auto& r : sim.records) (r.day < gc.days ? d.train : d.test).push_back(std::move(r));
  d.manifest.generator_hash = config.generator_hash();
  d.manifest.seed = config.seed;
  d.manifest.generator = gc;
  d.manifest.train_sha256 = sha256_hex(datagen::format_dataset(d.train));
  d.manifest.test_sha256 = sha256_hex(datagen::format_dataset(d.test));
  d.manifest.dataset_hash = dataset_hash_of(d.manifest.train_sha256, d.manifest.test_sha256);
  d.manifest.train_records = d.train.size();
  d.manifest.test_records = d.test.size();
  return d;
}

void write_dataset_dir(const Dataset& dataset, const fs::path& dir, bool force) {
  if (!force) {
    for (const char* name : {kTrainFile, kTestFile, kManifestFile}) {
      if (fs::exists(dir / name)) {
        throw Error(errc::kExists, "'" + (dir / name).string() + "' already exists (use --force to overwrite)");
      }
    }
  }
  fs::create_directories(dir);
  write_file_atomic(dir / kTrainFile, datagen::format_dataset(dataset.train));
  write_file_atomic(dir / kTestFile, datagen::format_dataset(dataset.test));
  write_file_atomic(dir / kManifestFile, dataset.manifest.to_json().dump(2) + "\n");
}

Manifest read_manifest(const fs::path& dir) {
  const std::string text = read_file(dir / kManifestFile);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, (dir / kManifestFile).string() + ": " + e.what());
  }
  return Manifest::from_json(j);
}

Dataset read_dataset_dir(const fs::path& dir, const std::optional<std::string>& expected_generator_hash,
                         bool verify) {
  Dataset d;
  d.manifest = read_manifest(dir);
  if (verify && expected_generator_hash && *expected_generator_hash != d.manifest.generator_hash) {
    throw Error(errc::kHashMismatch, "dataset '" + dir.string() + "' was generated with generator hash " +
                                         d.manifest.generator_hash + " but the config expects " +
                                         *expected_generator_hash);
  }
  auto load = [&](const char* name, const std::string& expected) {
    const fs::path path = dir / name;
    const std::string text = read_file(path);
    if (verify) {
      const std::string actual = sha256_hex(text);
      if (actual != expected) {
        throw Error(errc::kHashMismatch, "'" + path.string() + "' has sha256 " + actual + " but the manifest records " +
                                             expected);
      }
    }
    return datagen::parse_dataset(text, path.string());
  };
  d.train = load(kTrainFile, d.manifest.train_sha256);
  d.test = load(kTestFile, d.manifest.test_sha256);
  return d;
}

TrainResult train_model(const model::ModelConfig& config, const Dataset& dataset,
                        const std::optional<fs::path>& checkpoint_dir, const std::string& name) {
  TrainResult result{model::CtrModel(config, features::build_vocab(dataset.train)), {}};
  model::OptimizerState state;
  model::FitOptions options;
  if (checkpoint_dir) {
    fs::create_directories(*checkpoint_dir);
    options.on_epoch = [&](const model::EpochLog& log, const model::CtrModel& m, const model::OptimizerState& s) {
      model::save_checkpoint(*checkpoint_dir / (name + ".epoch" + std::to_string(log.epoch) + ".ckpt"), m, s,
                             log.epoch, dataset.manifest.dataset_hash);
    };
  }
  result.logs = model::fit(result.model, state, dataset.train, options);
  if (checkpoint_dir) {
    model::save_checkpoint(*checkpoint_dir / (name + ".ckpt"), result.model, state, result.logs.size(),
                           dataset.manifest.dataset_hash);
  }
  return result;
}

metrics::PredictionFile evaluate_model(const model::CtrModel& model, const std::string& name, const Dataset& dataset,
                                       std::uint64_t partition_seed) {
  return {{name, model.config().hash(), dataset.manifest.dataset_hash},
          model::predict(model, dataset.test, partition_seed)};
}

namespace {

std::string cell(const seq::ScoreTable& t, seq::StockType target, seq::StockType item) {
  const auto m = t.mean(target, item);
  if (!m) return "        -";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%9.4f", *m);
  return buf;
}

}  // namespace

std::string render_attention_table(const seq::ScoreTable& t) {
  using seq::kLimited;
  using seq::kMulti;
  std::string out = "mean pre-softmax attention score\n";
  out += "target \\ sequence item     multi   limited\n";
  out += "multi                  " + cell(t, kMulti, kMulti) + " " + cell(t, kMulti, kLimited) + "\n";
  out += "limited                " + cell(t, kLimited, kMulti) + " " + cell(t, kLimited, kLimited) + "\n";
  return out;
}

nlohmann::json attention_table_json(const seq::ScoreTable& t) {
  nlohmann::json j = nlohmann::json::object();
  const std::pair<seq::StockType, const char*> types[] = {{seq::kMulti, "multi"}, {seq::kLimited, "limited"}};
  for (const auto& [target, tn] : types) {
    for (const auto& [item, in] : types) {
      const auto m = t.mean(target, item);
      j[std::string(tn) + "_" + in] = {{"mean", m ? nlohmann::json(*m) : nlohmann::json(nullptr)},
                                       {"count", t.count(target, item)}};
    }
  }
  return j;
}

}  // namespace msnet::cli
