// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/datagen/config_json.hpp"

#include "msnet/common/error.hpp"

namespace msnet::datagen {

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "generator config must be an object");
  const nlohmann::json known = GeneratorConfig{};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(errc::kInvalidConfig, "generator config: unknown key '" + key + "'");
  }
  GeneratorConfig c;
  try {
    c = j.get<GeneratorConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace msnet::datagen
