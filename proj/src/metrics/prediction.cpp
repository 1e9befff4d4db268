// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/metrics/prediction.hpp"

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::metrics {

namespace {

constexpr const char* kColumns = "user_id\titem_id\tp\ty\tis_new\tis_limited\tpartition_id";

std::string_view after_prefix(std::string_view line, std::string_view key, std::size_t line_no,
                              const std::string& source) {
  if (line.substr(0, key.size()) != key) {
    throw Error(errc::kParse, source + ": line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
  }
  return line.substr(key.size());
}

bool parse_bit(std::string_view s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw Error(errc::kParse, "expected 0 or 1, got '" + std::string(s) + "'");
}

}  // namespace

int partition_of(std::int64_t user_id, std::int64_t item_id, std::uint64_t seed) {
  const std::uint64_t h = mix64(mix64(seed ^ static_cast<std::uint64_t>(user_id)) + static_cast<std::uint64_t>(item_id));
  return static_cast<int>(h % kPartitions);
}

std::string format_predictions(const PredictionFile& file) {
  std::string out = std::string(kPredictionFormat) + "\n";
  out += "#model=" + file.meta.model + "\n";
  out += "#config_hash=" + file.meta.config_hash + "\n";
  out += "#dataset_hash=" + file.meta.dataset_hash + "\n";
  out += kColumns;
  out += '\n';
  for (const PredictionRecord& r : file.records) {
    out += std::to_string(r.user_id) + '\t' + std::to_string(r.item_id) + '\t' + format_double(r.p) + '\t' +
           std::to_string(r.y) + '\t' + (r.is_new ? '1' : '0') + '\t' + (r.is_limited ? '1' : '0') + '\t' +
           std::to_string(r.partition_id) + '\n';
  }
  return out;
}

PredictionFile parse_predictions(const std::string& text, const std::string& source) {
  PredictionFile file;
  const auto lines = split(text, '\n');
  if (lines.size() < 5 || lines[0] != kPredictionFormat) {
    throw Error(errc::kParse, source + ": line 1: missing or unsupported header (expected " +
                                  std::string(kPredictionFormat) + ")");
  }
  file.meta.model = std::string(after_prefix(lines[1], "#model=", 2, source));
  file.meta.config_hash = std::string(after_prefix(lines[2], "#config_hash=", 3, source));
  file.meta.dataset_hash = std::string(after_prefix(lines[3], "#dataset_hash=", 4, source));
  if (lines[4] != kColumns) throw Error(errc::kParse, source + ": line 5: unexpected column header");
  for (std::size_t i = 5; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const auto f = split(lines[i], '\t');
    const std::string where = source + ": line " + std::to_string(i + 1) + ": ";
    if (f.size() != 7) {
      throw Error(errc::kParse, where + "expected 7 fields, got " + std::to_string(f.size()));
    }
    try {
      PredictionRecord r;
      r.user_id = parse_int(f[0]);
      r.item_id = parse_int(f[1]);
      r.p = parse_double(f[2]);
      r.y = parse_bit(f[3]) ? 1 : 0;
      r.is_new = parse_bit(f[4]);
      r.is_limited = parse_bit(f[5]);
      r.partition_id = static_cast<int>(parse_int(f[6]));
      if (r.partition_id < 0 || r.partition_id >= static_cast<int>(kPartitions)) {
        throw Error(errc::kParse, "partition_id out of range");
      }
      file.records.push_back(r);
    } catch (const Error& e) {
      throw Error(errc::kParse, where + e.what());
    }
  }
  return file;
}

void write_predictions(const PredictionFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, format_predictions(file));
}

PredictionFile read_predictions(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(errc::kIo, "prediction file '" + path.string() + "' does not exist");
  }
  return parse_predictions(read_file(path), path.string());
}

}  // namespace msnet::metrics
