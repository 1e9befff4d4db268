// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/model/config.hpp"

#include <cmath>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::model {

std::string to_string(Arch arch) { return arch == Arch::kDin ? "din" : "msnet"; }

Arch parse_arch(const std::string& text) {
  if (text == "din") return Arch::kDin;
  if (text == "msnet") return Arch::kMsnet;
  throw Error(errc::kInvalidConfig, "unknown architecture '" + text + "' (expected din or msnet)");
}

namespace {

std::string to_string(AuxScope s) { return s == AuxScope::kBoth ? "both" : "limited_only"; }

AuxScope parse_scope(const std::string& text) {
  if (text == "limited_only") return AuxScope::kLimitedOnly;
  if (text == "both") return AuxScope::kBoth;
  throw Error(errc::kInvalidConfig, "unknown aux_scope '" + text + "' (expected limited_only or both)");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(errc::kInvalidConfig, "model config: " + what);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("model config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void ModelConfig::validate() const {
  require(id_dim > 0 && side_dim > 0, "embedding dims must be positive");
  require(max_len > 0, "max_len must be positive");
  require(n_heads > 0 && d_head > 0, "attention sizes must be positive");
  require(meta_hidden > 0, "meta_hidden must be positive");
  for (std::size_t h : hidden) require(h > 0, "hidden sizes must be positive");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning_rate must be >= 0");
  require(adagrad_decay > 0.0 && adagrad_decay <= 1.0, "adagrad_decay must be in (0, 1]");
  require(batch_size > 0, "batch_size must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"arch", model::to_string(arch)},
          {"id_dim", id_dim},
          {"side_dim", side_dim},
          {"max_len", max_len},
          {"n_heads", n_heads},
          {"d_head", d_head},
          {"hidden", hidden},
          {"meta_hidden", meta_hidden},
          {"alpha", alpha},
          {"learning_rate", learning_rate},
          {"adagrad_decay", adagrad_decay},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"seed", seed},
          {"aux_scope", to_string(aux_scope)},
          {"seq_split", seq_split},
          {"seq_meta", seq_meta},
          {"aux_loss", aux_loss},
          {"meta_on_multi", meta_on_multi},
          {"force_identity_scale", force_identity_scale},
          {"force_original_id", force_original_id}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "model config must be an object");
  static const char* known[] = {"arch", "id_dim", "side_dim", "max_len", "n_heads", "d_head", "hidden",
                                "meta_hidden", "alpha", "learning_rate", "adagrad_decay", "batch_size",
                                "epochs", "seed", "aux_scope", "seq_split", "seq_meta", "aux_loss",
                                "meta_on_multi", "force_identity_scale", "force_original_id"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(errc::kInvalidConfig, "model config: unknown key '" + key + "'");
    }
  }
  ModelConfig c;
  std::string arch = to_string(c.arch), scope = to_string(c.aux_scope);
  read(j, "arch", arch);
  c.arch = parse_arch(arch);
  read(j, "id_dim", c.id_dim);
  read(j, "side_dim", c.side_dim);
  read(j, "max_len", c.max_len);
  read(j, "n_heads", c.n_heads);
  read(j, "d_head", c.d_head);
  read(j, "hidden", c.hidden);
  read(j, "meta_hidden", c.meta_hidden);
  read(j, "alpha", c.alpha);
  read(j, "learning_rate", c.learning_rate);
  read(j, "adagrad_decay", c.adagrad_decay);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "aux_scope", scope);
  c.aux_scope = parse_scope(scope);
  read(j, "seq_split", c.seq_split);
  read(j, "seq_meta", c.seq_meta);
  read(j, "aux_loss", c.aux_loss);
  read(j, "meta_on_multi", c.meta_on_multi);
  read(j, "force_identity_scale", c.force_identity_scale);
  read(j, "force_original_id", c.force_original_id);
  c.validate();
  return c;
}

std::string ModelConfig::hash() const { return short_hash(to_json().dump()); }

}  // namespace msnet::model
