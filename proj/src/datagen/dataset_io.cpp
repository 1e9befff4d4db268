// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/datagen/dataset_io.hpp"

#include <filesystem>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::datagen {
namespace {

constexpr std::size_t kFieldCount = 9;

bool parse_flag(std::string_view text, std::size_t line, const std::string& source) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw Error(errc::kParse, source + ": line " + std::to_string(line) + ": expected 0 or 1, got '" +
                                std::string(text) + "'");
}

}  // namespace

std::string dataset_header() {
  return std::string(kDatasetFormat) +
         "\tday\tuser_id\titem_id\tlabel\ttrue_ctr\titem_is_limited\titem_is_new\thistory\titem_category_id";
}

std::string format_dataset(std::span<const ImpressionRecord> records) {
  std::string out = dataset_header();
  out += '\n';
  for (const ImpressionRecord& r : records) {
    out += std::to_string(r.day);
    out += '\t';
    out += std::to_string(r.user_id);
    out += '\t';
    out += std::to_string(r.item_id);
    out += '\t';
    out += std::to_string(r.label);
    out += '\t';
    out += format_double(r.true_ctr);
    out += '\t';
    out += r.item_is_limited ? '1' : '0';
    out += '\t';
    out += r.item_is_new ? '1' : '0';
    out += '\t';
    for (std::size_t k = 0; k < r.user_history.size(); ++k) {
      const HistoryEntry& h = r.user_history[k];
      if (k) out += ',';
      out += std::to_string(h.item_id);
      out += ':';
      out += std::to_string(h.category_id);
      out += ':';
      out += h.is_limited ? '1' : '0';
    }
    out += '\t';
    out += std::to_string(r.item_category_id);
    out += '\n';
  }
  return out;
}

std::vector<ImpressionRecord> parse_dataset(const std::string& text, const std::string& source) {
  std::vector<ImpressionRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool seen_header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (!seen_header) {
      if (line != dataset_header()) {
        throw Error(errc::kParse, source + ": line 1: missing or unsupported header (expected " +
                                      std::string(kDatasetFormat) + ")");
      }
      seen_header = true;
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != kFieldCount) {
      throw Error(errc::kParse, source + ": line " + std::to_string(line_no) + ": expected " +
                                    std::to_string(kFieldCount) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    try {
      ImpressionRecord r;
      r.day = static_cast<int>(parse_int(fields[0]));
      r.user_id = parse_int(fields[1]);
      r.item_id = parse_int(fields[2]);
      r.label = static_cast<int>(parse_int(fields[3]));
      if (r.label != 0 && r.label != 1) throw Error(errc::kParse, "label must be 0 or 1");
      r.true_ctr = parse_double(fields[4]);
      r.item_is_limited = parse_flag(fields[5], line_no, source);
      r.item_is_new = parse_flag(fields[6], line_no, source);
      if (!fields[7].empty()) {
        for (std::string_view triple : split(fields[7], ',')) {
          const auto parts = split(triple, ':');
          if (parts.size() != 3) throw Error(errc::kParse, "malformed history entry '" + std::string(triple) + "'");
          r.user_history.push_back({parse_int(parts[0]), parse_int(parts[1]), parse_flag(parts[2], line_no, source)});
        }
      }
      r.item_category_id = parse_int(fields[8]);
      records.push_back(std::move(r));
    } catch (const Error& e) {
      if (std::string(e.what()).find(": line ") != std::string::npos) throw;
      throw Error(errc::kParse, source + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!seen_header) {
    throw Error(errc::kParse, source + ": empty file (missing header)");
  }
  return records;
}

void write_dataset(std::span<const ImpressionRecord> records, const std::filesystem::path& path) {
  write_file_atomic(path, format_dataset(records));
}

std::vector<ImpressionRecord> read_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(errc::kIo, "dataset file '" + path.string() + "' does not exist");
  }
  return parse_dataset(read_file(path), path.string());
}

}  // namespace msnet::datagen
