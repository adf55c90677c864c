// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mgs/image.hpp"
#include "mgs/splat.hpp"

namespace mgs {

struct RenderSettings {
  std::uint32_t tile_size = 16;
  double alpha_min = 1.0 / 255.0;
  double alpha_max = 0.999;
  double radius_sigmas = 3.0;
  double transmittance_min = 1e-4;

  // Throws kInvalidConfig.
  void validate() const;

  friend bool operator==(const RenderSettings&, const RenderSettings&) = default;
};

// A prefix splat with its activated parameters, in compositing order.
struct ProjectedSplat {
  double mu_x, mu_y;
  double cos_theta, sin_theta;
  double inv_var0, inv_var1;
  double opacity;
  double color[3];
  double radius2;
  std::int32_t x_lo, x_hi, y_lo, y_hi;  // inclusive pixel bounds, clipped to the canvas
  std::uint32_t storage_index;
};

// Depth-sorted prefix binned into tiles (CSR layout).
struct RasterPlan {
  std::uint32_t width = 0, height = 0, tile_size = 16;
  std::uint32_t tiles_x = 0, tiles_y = 0;
  std::size_t prefix_size = 0;
  std::vector<ProjectedSplat> splats;        // sorted by (depth, id)
  std::vector<std::uint32_t> tile_offsets;   // tiles_x * tiles_y + 1
  std::vector<std::uint32_t> tile_entries;   // indices into splats

  std::size_t tile_count() const noexcept { return static_cast<std::size_t>(tiles_x) * tiles_y; }
};

// Forward state kept for the backward pass.
struct RenderCache {
  RasterPlan plan;
  std::vector<double> final_transmittance;  // per pixel
  std::vector<std::uint32_t> stop;          // per pixel: tile entries processed before early stop
};

RasterPlan build_plan(const SplatModel& model, std::size_t k, const RenderSettings& settings);

// Front-to-back compositing of the first k splats (depth order, ties by id)
// over the model background. Throws kOutOfRange for k > N, kInvalidModel for
// non-finite parameters.
Image render(const SplatModel& model, std::size_t k, const RenderSettings& settings = {},
             RenderCache* cache = nullptr);

struct TimedRender {
  Image image;
  double median_ms = 0.0;
};

// One untimed warm-up, then the median wall-clock time of `repeats` renders.
TimedRender render_timed(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                         int repeats);

struct RenderCounters {
  std::uint64_t renders = 0;
  std::uint64_t backwards = 0;
};

// Process-wide call counters for render() and backward().
RenderCounters render_counters() noexcept;
void reset_render_counters() noexcept;

}  // namespace mgs
