// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msnet/datagen/market.hpp"

namespace msnet::datagen {

// Tab-separated, one impression per line, behind a single header line:
//   #format=msnet-dataset/v1  day  user_id  item_id  label  true_ctr
//   item_is_limited  item_is_new  history  item_category_id
// history is a comma-separated list of item_id:category_id:limited triples,
// most recent first; an empty history is an empty field.
inline constexpr const char* kDatasetFormat = "#format=msnet-dataset/v1";

std::string dataset_header();
std::string format_dataset(std::span<const ImpressionRecord> records);
std::vector<ImpressionRecord> parse_dataset(const std::string& text, const std::string& source = "<memory>");

void write_dataset(std::span<const ImpressionRecord> records, const std::filesystem::path& path);
std::vector<ImpressionRecord> read_dataset(const std::filesystem::path& path);

}  // namespace msnet::datagen
