// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "msnet/model/model.hpp"
#include "msnet/model/optimizer.hpp"

namespace msnet::model {

// Binary container, little-endian:
//
//   "MSNETCKP"            8-byte magic
//   u32 version           kCheckpointVersion
//   u64 payload_size
//   char[64] sha256       hex digest of the payload
//   payload:
//     str config_json, str config_hash, str dataset_hash, u64 epochs_completed
//     vocab items, vocab categories     u64 n, then n x i64 raw ids
//     u64 n_params, then per parameter:
//       str name, u8 sparse, u64 rank, rank x u64 dims, product(dims) x f64
//     u64 steps, u64 n_acc, then per accumulator: str name, u64 n, n x f64
//
// str is u64 length followed by the bytes. The file is written through a
// temporary and renamed, so an interrupted save leaves the previous file.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  std::string config_hash;
  std::string dataset_hash;
  std::size_t epochs_completed = 0;
  features::Vocabularies vocabs;
  ad::ParameterStore params;
  OptimizerState optimizer;
};

std::string serialize_checkpoint(const CtrModel& model, const OptimizerState& state, std::size_t epochs_completed,
                                 const std::string& dataset_hash);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& source);

void save_checkpoint(const std::filesystem::path& path, const CtrModel& model, const OptimizerState& state,
                     std::size_t epochs_completed, const std::string& dataset_hash);

// Refuses files with a bad magic, version, size or digest. With an
// expected config, also refuses a different config hash.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected = {});

CtrModel model_from(Checkpoint& checkpoint);

}  // namespace msnet::model
