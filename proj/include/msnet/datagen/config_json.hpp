// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "msnet/datagen/market.hpp"

namespace msnet::datagen {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeneratorConfig, n_users, n_items, n_categories, days,
                                                limited_fraction, min_multi, max_multi, bias, w_aff, w_q,
                                                purchase_given_click, new_item_rate, activity_mean, exploration,
                                                affinity_temperature, preference_concentration,
                                                category_quality_spread, item_quality_noise, max_history,
                                                initial_age_days)

// Missing keys keep their defaults; unknown keys and bad values are
// errc::kInvalidConfig.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

}  // namespace msnet::datagen
