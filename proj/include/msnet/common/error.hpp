// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace msnet {

// Every failure the library reports carries a short machine-readable code
// (e.g. "PARSE_ERROR") next to the human message. The CLI prints both.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* kShapeMismatch = "SHAPE_MISMATCH";
inline constexpr const char* kIndexOutOfRange = "INDEX_OUT_OF_RANGE";
inline constexpr const char* kInvalidArgument = "INVALID_ARGUMENT";
inline constexpr const char* kInvalidConfig = "INVALID_CONFIG";
inline constexpr const char* kNonFinite = "NON_FINITE";
inline constexpr const char* kParse = "PARSE_ERROR";
inline constexpr const char* kIo = "IO_ERROR";
inline constexpr const char* kExists = "ALREADY_EXISTS";
inline constexpr const char* kHashMismatch = "HASH_MISMATCH";
inline constexpr const char* kConfigMismatch = "CONFIG_MISMATCH";
inline constexpr const char* kCorrupt = "CHECKPOINT_CORRUPT";
inline constexpr const char* kVersion = "VERSION_MISMATCH";
inline constexpr const char* kDiverged = "TRAINING_DIVERGED";
}  // namespace errc

}  // namespace msnet
