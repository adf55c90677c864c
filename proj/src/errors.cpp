// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/errors.hpp"

namespace mgs {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid parameter";
    case ErrorCode::kInvalidConfig: return "invalid config";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kInvalidModel: return "invalid model";
    case ErrorCode::kTrainingDiverged: return "training diverged";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kEmptyEnvelope: return "empty envelope";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace mgs
