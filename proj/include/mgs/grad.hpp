// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mgs/image.hpp"
#include "mgs/render.hpp"
#include "mgs/splat.hpp"

namespace mgs {

// Gradient of a scalar with respect to one splat's raw parameters.
struct SplatGrad {
  Vec2 mu{0.0, 0.0};
  Vec2 log_scale{0.0, 0.0};
  double theta = 0.0;
  double opacity_raw = 0.0;
  Vec3 color_raw{0.0, 0.0, 0.0};

  SplatGrad& operator+=(const SplatGrad& o) noexcept;
  SplatGrad& operator*=(double s) noexcept;
  bool is_finite() const noexcept;
  friend bool operator==(const SplatGrad&, const SplatGrad&) = default;
};

// Aligned with model storage order.
struct GradientBuffer {
  std::vector<SplatGrad> rows;

  explicit GradientBuffer(std::size_t n = 0) : rows(n) {}
  std::size_t size() const noexcept { return rows.size(); }
  GradientBuffer& operator+=(const GradientBuffer& o);
  bool is_finite() const noexcept;
  friend bool operator==(const GradientBuffer&, const GradientBuffer&) = default;
};

// dL/dparams for L = sum_u <pixel_grad(u), render(model, k)(u)>. Reuses the
// forward state in cache when it was produced for the same (model, k,
// settings); otherwise the forward composite is recomputed. Rows at
// storage index >= k are zero.
GradientBuffer backward(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                        const Image& pixel_grad, const RenderCache* cache = nullptr);

enum class Param {
  kMuX,
  kMuY,
  kLogScale0,
  kLogScale1,
  kTheta,
  kOpacityRaw,
  kColorR,
  kColorG,
  kColorB,
};
inline constexpr Param kAllParams[] = {Param::kMuX,       Param::kMuY,   Param::kLogScale0,
                                       Param::kLogScale1, Param::kTheta, Param::kOpacityRaw,
                                       Param::kColorR,    Param::kColorG, Param::kColorB};

struct ParamSelector {
  std::size_t splat = 0;  // storage index
  Param param = Param::kMuX;
};

double& param_ref(Splat& splat, Param param) noexcept;
double grad_value(const SplatGrad& grad, Param param) noexcept;
double& grad_ref(SplatGrad& grad, Param param) noexcept;
const char* to_string(Param param) noexcept;

using ImageLoss = std::function<double(const Image&)>;

// Central difference (L(p + h) - L(p - h)) / 2h of loss(render(model, k)).
double fd_gradient(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                   const ImageLoss& loss, ParamSelector selector, double h = 1e-4);

}  // namespace mgs
