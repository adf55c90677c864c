// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>

namespace mgs::simd {

enum class Level { kScalar, kAvx2 };

std::string_view to_string(Level level) noexcept;
std::optional<Level> parse_level(std::string_view name) noexcept;

// True when both the build and the running CPU support the level.
bool supported(Level level) noexcept;

// Best supported level.
Level best_level() noexcept;

// Level used by the dispatched kernels. Initialized on first use from the
// MGS_SIMD environment variable ("scalar" or "avx2") or best_level().
Level active_level() noexcept;

// Throws kInvalidConfig for an unsupported level. Not meant to be called
// while kernels are running on other threads.
void set_active_level(Level level);

// Restores the previous level on destruction.
class ScopedLevel {
 public:
  explicit ScopedLevel(Level level) : previous_(active_level()) { set_active_level(level); }
  ~ScopedLevel() { set_active_level(previous_); }
  ScopedLevel(const ScopedLevel&) = delete;
  ScopedLevel& operator=(const ScopedLevel&) = delete;

 private:
  Level previous_;
};

}  // namespace mgs::simd
