// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "mgs/errors.hpp"
#include "mgs/simd/kernels.hpp"

namespace mgs::simd {

#if !defined(MGS_WITH_AVX2)
const KernelTable* avx2::table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(MGS_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* table_for(Level level) noexcept {
  switch (level) {
    case Level::kScalar: return &scalar::table();
    case Level::kAvx2: return cpu_has_avx2() ? avx2::table() : nullptr;
  }
  return nullptr;
}

Level initial_level() noexcept {
  if (const char* env = std::getenv("MGS_SIMD")) {
    if (auto level = parse_level(env); level && supported(*level)) return *level;
  }
  return best_level();
}

struct ActiveState {
  ActiveState() {
    const Level level = initial_level();
    active.store(level);
    table.store(table_for(level));
  }
  std::atomic<Level> active;
  std::atomic<const KernelTable*> table;
};

ActiveState& state() noexcept {
  static ActiveState instance;
  return instance;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  return level == Level::kAvx2 ? "avx2" : "scalar";
}

std::optional<Level> parse_level(std::string_view name) noexcept {
  if (name == "scalar") return Level::kScalar;
  if (name == "avx2") return Level::kAvx2;
  return std::nullopt;
}

bool supported(Level level) noexcept { return table_for(level) != nullptr; }

Level best_level() noexcept { return supported(Level::kAvx2) ? Level::kAvx2 : Level::kScalar; }

Level active_level() noexcept { return state().active.load(std::memory_order_acquire); }

void set_active_level(Level level) {
  const KernelTable* table = table_for(level);
  if (table == nullptr) {
    fail(ErrorCode::kInvalidConfig,
         "SIMD level " + std::string(to_string(level)) + " is not supported here");
  }
  state().table.store(table, std::memory_order_release);
  state().active.store(level, std::memory_order_release);
}

const KernelTable& kernels() { return *state().table.load(std::memory_order_acquire); }

}  // namespace mgs::simd
