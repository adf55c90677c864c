// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/render.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "mgs/errors.hpp"
#include "mgs/parallel.hpp"
#include "raster_internal.hpp"

namespace mgs {
namespace {

std::atomic<std::uint64_t> g_renders{0};
std::atomic<std::uint64_t> g_backwards{0};

}  // namespace

namespace detail {

std::atomic<std::uint64_t>& backward_counter() noexcept { return g_backwards; }

void composite_tile(const RasterPlan& plan, std::size_t tile, const RenderSettings& settings,
                    double* color, double* transmittance, std::uint32_t* stop) {
  const TileRect rect = tile_rect(plan, tile);
  const std::int32_t tw = rect.width();
  const std::size_t n_pix = static_cast<std::size_t>(tw) * rect.height();
  const std::uint32_t begin = plan.tile_offsets[tile];
  const std::uint32_t end = plan.tile_offsets[tile + 1];
  const auto n_entries = end - begin;

  std::fill(color, color + 3 * n_pix, 0.0);
  std::fill(transmittance, transmittance + n_pix, 1.0);
  std::fill(stop, stop + n_pix, n_entries);

  std::array<double, 256> alpha_stack;
  std::vector<double> alpha_heap;
  double* alpha = alpha_stack.data();
  if (static_cast<std::size_t>(tw) > alpha_stack.size()) {
    alpha_heap.resize(tw);
    alpha = alpha_heap.data();
  }

  std::size_t live = n_pix;
  for (std::uint32_t j = 0; j < n_entries && live > 0; ++j) {
    const ProjectedSplat& s = plan.splats[plan.tile_entries[begin + j]];
    const std::int32_t cx0 = std::max(s.x_lo, rect.x0);
    const std::int32_t cx1 = std::min(s.x_hi + 1, rect.x1);
    const std::int32_t cy0 = std::max(s.y_lo, rect.y0);
    const std::int32_t cy1 = std::min(s.y_hi + 1, rect.y1);
    if (cx0 >= cx1 || cy0 >= cy1) continue;
    const auto count = static_cast<std::size_t>(cx1 - cx0);
    for (std::int32_t y = cy0; y < cy1; ++y) {
      simd::splat_alpha_row(row_params(s, y, settings), cx0, count, alpha);
      const std::size_t row_base = static_cast<std::size_t>(y - rect.y0) * tw + (cx0 - rect.x0);
      for (std::size_t i = 0; i < count; ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        const std::size_t pix = row_base + i;
        if (stop[pix] != n_entries) continue;
        const double t = transmittance[pix];
        const double w = a * t;
        double* c = color + 3 * pix;
        c[0] += s.color[0] * w;
        c[1] += s.color[1] * w;
        c[2] += s.color[2] * w;
        const double t_next = t * (1.0 - a);
        transmittance[pix] = t_next;
        if (t_next < settings.transmittance_min) {
          stop[pix] = j + 1;
          --live;
        }
      }
    }
  }
}

}  // namespace detail

void RenderSettings::validate() const {
  if (tile_size == 0) fail(ErrorCode::kInvalidConfig, "tile_size must be positive");
  if (!(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "need 0 < alpha_min < alpha_max < 1");
  }
  if (!(radius_sigmas > 0.0) || !std::isfinite(radius_sigmas)) {
    fail(ErrorCode::kInvalidConfig, "radius_sigmas must be positive");
  }
  if (!(transmittance_min >= 0.0 && transmittance_min < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "transmittance_min must lie in [0, 1)");
  }
}

RasterPlan build_plan(const SplatModel& model, std::size_t k, const RenderSettings& settings) {
  settings.validate();
  if (model.width == 0 || model.height == 0) {
    fail(ErrorCode::kInvalidModel, "canvas dimensions must be positive");
  }
  const auto splats = prefix(model, k);

  RasterPlan plan;
  plan.width = model.width;
  plan.height = model.height;
  plan.tile_size = settings.tile_size;
  plan.tiles_x = (model.width + settings.tile_size - 1) / settings.tile_size;
  plan.tiles_y = (model.height + settings.tile_size - 1) / settings.tile_size;
  plan.prefix_size = k;

  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  for (const auto& s : splats) {
    if (!s.is_finite()) {
      fail(ErrorCode::kInvalidModel, "splat " + std::to_string(s.id) + " has non-finite fields");
    }
  }
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (splats[a].depth != splats[b].depth) return splats[a].depth < splats[b].depth;
    return splats[a].id < splats[b].id;
  });

  const double max_x = model.width - 1;
  const double max_y = model.height - 1;
  plan.splats.reserve(k);
  for (std::uint32_t idx : order) {
    const Splat& s = splats[idx];
    const auto scale = s.scale();
    const auto color = s.color();
    ProjectedSplat p{};
    p.mu_x = s.mu[0];
    p.mu_y = s.mu[1];
    p.cos_theta = std::cos(s.theta);
    p.sin_theta = std::sin(s.theta);
    p.inv_var0 = 1.0 / (scale[0] * scale[0]);
    p.inv_var1 = 1.0 / (scale[1] * scale[1]);
    p.opacity = s.opacity();
    p.color[0] = color[0];
    p.color[1] = color[1];
    p.color[2] = color[2];
    const double radius = settings.radius_sigmas * std::max(scale[0], scale[1]);
    p.radius2 = radius * radius;
    // Pixels whose centers (x + 0.5) lie within radius of mu.
    const double xl = std::ceil(s.mu[0] - radius - 0.5);
    const double xh = std::floor(s.mu[0] + radius - 0.5);
    const double yl = std::ceil(s.mu[1] - radius - 0.5);
    const double yh = std::floor(s.mu[1] + radius - 0.5);
    if (xh < 0.0 || yh < 0.0 || xl > max_x || yl > max_y || xl > xh || yl > yh) continue;
    p.x_lo = static_cast<std::int32_t>(std::max(xl, 0.0));
    p.x_hi = static_cast<std::int32_t>(std::min(xh, max_x));
    p.y_lo = static_cast<std::int32_t>(std::max(yl, 0.0));
    p.y_hi = static_cast<std::int32_t>(std::min(yh, max_y));
    p.storage_index = idx;
    plan.splats.push_back(p);
  }

  const std::size_t tiles = plan.tile_count();
  const std::uint32_t ts = settings.tile_size;
  std::vector<std::uint32_t> counts(tiles + 1, 0);
  auto for_each_tile = [&](const ProjectedSplat& p, auto&& fn) {
    for (std::uint32_t ty = p.y_lo / ts; ty <= p.y_hi / ts; ++ty) {
      for (std::uint32_t tx = p.x_lo / ts; tx <= p.x_hi / ts; ++tx) fn(ty * plan.tiles_x + tx);
    }
  };
  for (const auto& p : plan.splats) for_each_tile(p, [&](std::size_t t) { ++counts[t + 1]; });
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  plan.tile_offsets = counts;
  plan.tile_entries.resize(counts.back());
  std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
  for (std::uint32_t i = 0; i < plan.splats.size(); ++i) {
    for_each_tile(plan.splats[i], [&](std::size_t t) { plan.tile_entries[cursor[t]++] = i; });
  }
  return plan;
}

Image render(const SplatModel& model, std::size_t k, const RenderSettings& settings,
             RenderCache* cache) {
  g_renders.fetch_add(1, std::memory_order_relaxed);
  RasterPlan plan = build_plan(model, k, settings);
  const std::uint32_t width = plan.width;
  Image image(plan.width, plan.height);
  std::vector<double> final_t;
  std::vector<std::uint32_t> final_stop;
  if (cache) {
    final_t.assign(image.pixel_count(), 1.0);
    final_stop.assign(image.pixel_count(), 0);
  }
  const double bg[3] = {model.background[0], model.background[1], model.background[2]};

  parallel_for(plan.tile_count(), [&](std::size_t tile) {
    const detail::TileRect rect = detail::tile_rect(plan, tile);
    const std::size_t n_pix = static_cast<std::size_t>(rect.width()) * rect.height();
    std::vector<double> color(3 * n_pix);
    std::vector<double> trans(n_pix);
    std::vector<std::uint32_t> stop(n_pix);
    detail::composite_tile(plan, tile, settings, color.data(), trans.data(), stop.data());
    for (std::int32_t y = rect.y0; y < rect.y1; ++y) {
      for (std::int32_t x = rect.x0; x < rect.x1; ++x) {
        const std::size_t local = static_cast<std::size_t>(y - rect.y0) * rect.width() + (x - rect.x0);
        const std::size_t global = static_cast<std::size_t>(y) * width + x;
        const double t = trans[local];
        for (std::size_t c = 0; c < 3; ++c) {
          image.data()[3 * global + c] = std::clamp(color[3 * local + c] + t * bg[c], 0.0, 1.0);
        }
        if (cache) {
          final_t[global] = t;
          final_stop[global] = stop[local];
        }
      }
    }
  });

  if (cache) {
    cache->plan = std::move(plan);
    cache->final_transmittance = std::move(final_t);
    cache->stop = std::move(final_stop);
  }
  return image;
}

TimedRender render_timed(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                         int repeats) {
  if (repeats < 1) fail(ErrorCode::kInvalidInput, "repeats must be at least 1");
  TimedRender out;
  out.image = render(model, k, settings);
  std::vector<double> times;
  times.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    Image img = render(model, k, settings);
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    if (r == repeats - 1) out.image = std::move(img);
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  out.median_ms = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  return out;
}

RenderCounters render_counters() noexcept {
  return RenderCounters{g_renders.load(), g_backwards.load()};
}

void reset_render_counters() noexcept {
  g_renders.store(0);
  g_backwards.store(0);
}

}  // namespace mgs
