// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>

#include "mgs/render.hpp"
#include "mgs/simd/kernels.hpp"

namespace mgs::detail {

struct TileRect {
  std::int32_t x0, y0, x1, y1;  // half-open
  std::int32_t width() const noexcept { return x1 - x0; }
  std::int32_t height() const noexcept { return y1 - y0; }
};

inline TileRect tile_rect(const RasterPlan& plan, std::size_t tile) {
  const auto tx = static_cast<std::int32_t>(tile % plan.tiles_x);
  const auto ty = static_cast<std::int32_t>(tile / plan.tiles_x);
  const auto ts = static_cast<std::int32_t>(plan.tile_size);
  return TileRect{tx * ts, ty * ts, std::min<std::int32_t>((tx + 1) * ts, plan.width),
                  std::min<std::int32_t>((ty + 1) * ts, plan.height)};
}

inline simd::AlphaRowParams row_params(const ProjectedSplat& s, std::int32_t y,
                                       const RenderSettings& settings) {
  simd::AlphaRowParams p;
  p.mu_x = s.mu_x;
  p.dy = (static_cast<double>(y) + 0.5) - s.mu_y;
  p.cos_theta = s.cos_theta;
  p.sin_theta = s.sin_theta;
  p.inv_var0 = s.inv_var0;
  p.inv_var1 = s.inv_var1;
  p.opacity = s.opacity;
  p.radius2 = s.radius2;
  p.alpha_min = settings.alpha_min;
  p.alpha_max = settings.alpha_max;
  return p;
}

// Forward composite of one tile. color is tile-local RGB (3 per pixel),
// transmittance and stop are tile-local per pixel.
void composite_tile(const RasterPlan& plan, std::size_t tile, const RenderSettings& settings,
                    double* color, double* transmittance, std::uint32_t* stop);

std::atomic<std::uint64_t>& backward_counter() noexcept;

}  // namespace mgs::detail
