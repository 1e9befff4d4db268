// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace msnet {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// First 16 hex characters of the SHA-256 digest; used as the short
// identity stamped into every output file.
std::string short_hash(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never observe
// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char delimiter);

// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

}  // namespace msnet
