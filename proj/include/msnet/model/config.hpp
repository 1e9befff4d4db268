// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace msnet::model {

enum class Arch { kDin, kMsnet };
enum class AuxScope { kLimitedOnly, kBoth };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& text);

// Defaults are desk-scale; the production reference values are noted where
// they differ.
struct ModelConfig {
  Arch arch = Arch::kMsnet;
  std::size_t id_dim = 8;
  std::size_t side_dim = 8;
  std::size_t max_len = 20;    // production: 50
  std::size_t n_heads = 2;
  std::size_t d_head = 8;      // production hidden size: 128
  std::vector<std::size_t> hidden{64, 32, 16};  // production: 512, 256, 128
  std::size_t meta_hidden = 16;
  double alpha = 0.1;
  double learning_rate = 1e-2;  // production: 1e-4
  double adagrad_decay = 1.0;   // 1 is plain Adagrad
  std::size_t batch_size = 256;  // production: 4096
  std::size_t epochs = 2;
  std::uint64_t seed = 1;
  AuxScope aux_scope = AuxScope::kLimitedOnly;

  // Ablation switches; ignored for DIN.
  bool seq_split = true;
  bool seq_meta = true;
  bool aux_loss = true;
  // Also apply the meta K/V to the multi-stock branch.
  bool meta_on_multi = false;

  // Degeneracy overrides: constant unit scaling and an unshifted id.
  bool force_identity_scale = false;
  bool force_original_id = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);  // missing keys keep defaults
  // Short hash of the canonical JSON form.
  std::string hash() const;

  bool is_msnet() const { return arch == Arch::kMsnet; }
  bool aux_active() const { return is_msnet() && aux_loss && alpha > 0.0; }
};

}  // namespace msnet::model
