// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mgs/criterion.hpp"

namespace mgs {

class Image;
class Rng;

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

// One 2D anisotropic Gaussian. All optimizable fields are unconstrained;
// the effective scale, opacity and color are obtained through exp/logistic.
struct Splat {
  std::uint64_t id = 0;
  Vec2 mu{0.0, 0.0};         // pixel coordinates; pixel (x, y) has center (x+0.5, y+0.5)
  Vec2 log_scale{0.0, 0.0};  // scale = exp(log_scale), pixels
  double theta = 0.0;        // radians, mod pi
  double opacity_raw = 0.0;
  Vec3 color_raw{0.0, 0.0, 0.0};
  double depth = 0.0;  // fixed; smaller is in front

  double opacity() const noexcept { return logistic(opacity_raw); }
  Vec2 scale() const noexcept { return {std::exp(log_scale[0]), std::exp(log_scale[1])}; }
  Vec3 color() const noexcept {
    return {logistic(color_raw[0]), logistic(color_raw[1]), logistic(color_raw[2])};
  }
  bool is_finite() const noexcept;

  friend bool operator==(const Splat&, const Splat&) = default;
};

// Sigma = R(theta) diag(s^2) R(theta)^T. Throws kInvalidParameter on non-finite input.
Mat2 covariance(const Splat& splat);

// Importance-ordered splats. Storage order is the nesting order: the first k
// entries form the budget-k prefix.
struct SplatModel {
  std::vector<Splat> splats;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
  OrderingCriterion criterion{};

  std::size_t size() const noexcept { return splats.size(); }

  friend bool operator==(const SplatModel&, const SplatModel&) = default;
};

// Throws kInvalidModel when ids repeat, parameters are non-finite or the
// canvas is empty.
void validate(const SplatModel& model);

// First k splats in storage order. Throws kOutOfRange when k > N.
std::span<const Splat> prefix(const SplatModel& model, std::size_t k);

struct InitConfig {
  std::size_t num_splats = 2000;
  std::uint32_t width = 128;
  std::uint32_t height = 128;
  double initial_scale = 2.0;
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
  // Target colors are clamped into [c, 1-c] before the logit.
  double color_clamp = 0.01;
  friend bool operator==(const InitConfig&, const InitConfig&) = default;
};

// Random initialization. When target is given, colors are sampled from it
// at the splat centers and the canvas takes the target's dimensions.
SplatModel init_model(const InitConfig& config, Rng& rng, const Image* target = nullptr);

// logit of the target color at the pixel containing mu, clamped as in InitConfig.
Vec3 color_raw_from_target(const Image& target, const Vec2& mu, double color_clamp);

}  // namespace mgs
