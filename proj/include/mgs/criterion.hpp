// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mgs {

enum class ScoreKind : std::uint8_t {
  kOpacity = 0,
  kArea = 1,
  kColorEnergy = 2,
  kColorVariance = 3,
  kFixedAppend = 4,
  kFixedPrepend = 5,
};

enum class SortDirection : std::uint8_t { kDescending = 0, kAscending = 1 };

// Importance ordering used to rank splats. direction is ignored by the
// fixed_* kinds, which always order by id.
struct OrderingCriterion {
  ScoreKind kind = ScoreKind::kOpacity;
  SortDirection direction = SortDirection::kDescending;

  bool is_fixed() const noexcept {
    return kind == ScoreKind::kFixedAppend || kind == ScoreKind::kFixedPrepend;
  }

  // Checkpoint tag: kind * 2 + direction. Fixed kinds always use direction 0.
  std::uint8_t tag() const noexcept;
  static std::optional<OrderingCriterion> from_tag(std::uint8_t tag) noexcept;

  friend bool operator==(const OrderingCriterion&, const OrderingCriterion&) = default;
};

std::string_view to_string(ScoreKind kind) noexcept;
std::string_view to_string(SortDirection direction) noexcept;
std::optional<ScoreKind> parse_score_kind(std::string_view name) noexcept;
std::optional<SortDirection> parse_direction(std::string_view name) noexcept;

// Short label such as "opacity_desc" or "fixed_append".
std::string label(const OrderingCriterion& criterion);

}  // namespace mgs
