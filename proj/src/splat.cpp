// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/splat.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "mgs/errors.hpp"
#include "mgs/image.hpp"
#include "mgs/rng.hpp"

namespace mgs {

std::uint8_t OrderingCriterion::tag() const noexcept {
  const auto dir = is_fixed() ? 0 : static_cast<std::uint8_t>(direction);
  return static_cast<std::uint8_t>(static_cast<std::uint8_t>(kind) * 2 + dir);
}

std::optional<OrderingCriterion> OrderingCriterion::from_tag(std::uint8_t tag) noexcept {
  const std::uint8_t kind = tag / 2;
  const std::uint8_t dir = tag % 2;
  if (kind > static_cast<std::uint8_t>(ScoreKind::kFixedPrepend)) return std::nullopt;
  OrderingCriterion c{static_cast<ScoreKind>(kind), static_cast<SortDirection>(dir)};
  if (c.is_fixed() && dir != 0) return std::nullopt;
  return c;
}

std::string_view to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::kOpacity: return "opacity";
    case ScoreKind::kArea: return "area";
    case ScoreKind::kColorEnergy: return "color_energy";
    case ScoreKind::kColorVariance: return "color_variance";
    case ScoreKind::kFixedAppend: return "fixed_append";
    case ScoreKind::kFixedPrepend: return "fixed_prepend";
  }
  return "unknown";
}

std::string_view to_string(SortDirection direction) noexcept {
  return direction == SortDirection::kDescending ? "descending" : "ascending";
}

std::optional<ScoreKind> parse_score_kind(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(ScoreKind::kFixedPrepend); ++i) {
    const auto kind = static_cast<ScoreKind>(i);
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::optional<SortDirection> parse_direction(std::string_view name) noexcept {
  if (name == "descending" || name == "desc") return SortDirection::kDescending;
  if (name == "ascending" || name == "asc") return SortDirection::kAscending;
  return std::nullopt;
}

std::string label(const OrderingCriterion& criterion) {
  std::string out(to_string(criterion.kind));
  if (!criterion.is_fixed()) {
    out += criterion.direction == SortDirection::kDescending ? "_desc" : "_asc";
  }
  return out;
}

bool Splat::is_finite() const noexcept {
  auto ok = [](double v) { return std::isfinite(v); };
  return ok(mu[0]) && ok(mu[1]) && ok(log_scale[0]) && ok(log_scale[1]) && ok(theta) &&
         ok(opacity_raw) && ok(color_raw[0]) && ok(color_raw[1]) && ok(color_raw[2]) &&
         ok(depth);
}

Mat2 covariance(const Splat& splat) {
  if (!splat.is_finite()) {
    fail(ErrorCode::kInvalidParameter, "splat " + std::to_string(splat.id) + " has non-finite fields");
  }
  const double c = std::cos(splat.theta);
  const double s = std::sin(splat.theta);
  const auto scale = splat.scale();
  const double l0 = scale[0] * scale[0];
  const double l1 = scale[1] * scale[1];
  // R diag(l0, l1) R^T with R = [[c, -s], [s, c]].
  const double off = c * s * (l0 - l1);
  return Mat2{{{c * c * l0 + s * s * l1, off}, {off, s * s * l0 + c * c * l1}}};
}

void validate(const SplatModel& model) {
  if (model.width == 0 || model.height == 0) {
    fail(ErrorCode::kInvalidModel, "canvas dimensions must be positive");
  }
  std::unordered_set<std::uint64_t> ids;
  ids.reserve(model.size());
  for (const auto& splat : model.splats) {
    if (!splat.is_finite()) {
      fail(ErrorCode::kInvalidModel, "splat " + std::to_string(splat.id) + " has non-finite fields");
    }
    if (!ids.insert(splat.id).second) {
      fail(ErrorCode::kInvalidModel, "duplicate splat id " + std::to_string(splat.id));
    }
  }
  for (float b : model.background) {
    if (!(b >= 0.0f && b <= 1.0f)) fail(ErrorCode::kInvalidModel, "background outside [0,1]");
  }
}

std::span<const Splat> prefix(const SplatModel& model, std::size_t k) {
  if (k > model.size()) {
    fail(ErrorCode::kOutOfRange,
         "prefix size " + std::to_string(k) + " exceeds model size " + std::to_string(model.size()));
  }
  return std::span<const Splat>(model.splats).first(k);
}

Vec3 color_raw_from_target(const Image& target, const Vec2& mu, double color_clamp) {
  const auto px = static_cast<std::uint32_t>(
      std::clamp(std::floor(mu[0]), 0.0, static_cast<double>(target.width() - 1)));
  const auto py = static_cast<std::uint32_t>(
      std::clamp(std::floor(mu[1]), 0.0, static_cast<double>(target.height() - 1)));
  Vec3 raw{};
  for (std::size_t c = 0; c < 3; ++c) {
    raw[c] = logit(std::clamp(target.at(px, py, c), color_clamp, 1.0 - color_clamp));
  }
  return raw;
}

SplatModel init_model(const InitConfig& config, Rng& rng, const Image* target) {
  if (config.num_splats == 0) fail(ErrorCode::kInvalidConfig, "num_splats must be at least 1");
  if (!(config.initial_scale > 0.0) || !std::isfinite(config.initial_scale)) {
    fail(ErrorCode::kInvalidConfig, "initial_scale must be positive");
  }
  if (!(config.color_clamp > 0.0 && config.color_clamp < 0.5)) {
    fail(ErrorCode::kInvalidConfig, "color_clamp must lie in (0, 0.5)");
  }
  SplatModel model;
  model.width = target ? target->width() : config.width;
  model.height = target ? target->height() : config.height;
  if (model.width == 0 || model.height == 0) {
    fail(ErrorCode::kInvalidConfig, "canvas dimensions must be positive");
  }
  model.background = config.background;
  model.splats.resize(config.num_splats);

  const double log_scale = std::log(config.initial_scale);
  const double w = model.width;
  const double h = model.height;
  for (std::size_t i = 0; i < config.num_splats; ++i) {
    Splat& s = model.splats[i];
    s.id = i;
    // uniform() < 1, but w * u can round up to w for large canvases.
    s.mu = {std::min(w * rng.uniform(), std::nextafter(w, 0.0)),
            std::min(h * rng.uniform(), std::nextafter(h, 0.0))};
    s.log_scale = {log_scale, log_scale};
    s.theta = 0.0;
    s.opacity_raw = 0.0;
    s.color_raw = target ? color_raw_from_target(*target, s.mu, config.color_clamp) : Vec3{};
    s.depth = rng.uniform();
  }
  return model;
}

}  // namespace mgs
