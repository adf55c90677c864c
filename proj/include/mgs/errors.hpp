// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mgs {

enum class ErrorCode {
  kInvalidParameter,
  kInvalidConfig,
  kOutOfRange,
  kInvalidInput,
  kInvalidModel,
  kTrainingDiverged,
  kParse,
  kIo,
  kEmptyEnvelope,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::int64_t step, const std::string& what)
      : Error(ErrorCode::kTrainingDiverged, what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace mgs
