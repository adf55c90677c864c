// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/image.hpp"

#include <string>

#include "mgs/errors.hpp"

namespace mgs {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kInvalidInput,
         std::string(what) + ": image dimensions differ (" + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()) + ")");
  }
}

}  // namespace mgs
