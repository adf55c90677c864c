// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/grad.hpp"

#include <cmath>

#include "mgs/errors.hpp"
#include "mgs/parallel.hpp"
#include "raster_internal.hpp"

namespace mgs {

SplatGrad& SplatGrad::operator+=(const SplatGrad& o) noexcept {
  mu[0] += o.mu[0];
  mu[1] += o.mu[1];
  log_scale[0] += o.log_scale[0];
  log_scale[1] += o.log_scale[1];
  theta += o.theta;
  opacity_raw += o.opacity_raw;
  for (std::size_t c = 0; c < 3; ++c) color_raw[c] += o.color_raw[c];
  return *this;
}

SplatGrad& SplatGrad::operator*=(double s) noexcept {
  mu[0] *= s;
  mu[1] *= s;
  log_scale[0] *= s;
  log_scale[1] *= s;
  theta *= s;
  opacity_raw *= s;
  for (auto& c : color_raw) c *= s;
  return *this;
}

bool SplatGrad::is_finite() const noexcept {
  for (Param p : kAllParams) {
    if (!std::isfinite(grad_value(*this, p))) return false;
  }
  return true;
}

GradientBuffer& GradientBuffer::operator+=(const GradientBuffer& o) {
  if (o.size() != size()) fail(ErrorCode::kInvalidInput, "gradient buffers differ in length");
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] += o.rows[i];
  return *this;
}

bool GradientBuffer::is_finite() const noexcept {
  for (const auto& r : rows) {
    if (!r.is_finite()) return false;
  }
  return true;
}

namespace {

// Accumulated per tile entry before the fixed-order merge. Color and opacity
// are kept in activated space and chained through the logistic at the end.
struct EntryGrad {
  double mu_x = 0, mu_y = 0, ls0 = 0, ls1 = 0, theta = 0, opacity = 0;
  double color[3] = {0, 0, 0};
};

}  // namespace

GradientBuffer backward(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                        const Image& pixel_grad, const RenderCache* cache) {
  detail::backward_counter().fetch_add(1, std::memory_order_relaxed);
  if (pixel_grad.width() != model.width || pixel_grad.height() != model.height) {
    fail(ErrorCode::kInvalidInput, "pixel gradient dimensions do not match the canvas");
  }
  if (k > model.size()) {
    fail(ErrorCode::kOutOfRange,
         "prefix size " + std::to_string(k) + " exceeds model size " + std::to_string(model.size()));
  }

  RasterPlan local_plan;
  const bool use_cache = cache && cache->plan.prefix_size == k &&
                         cache->plan.width == model.width && cache->plan.height == model.height &&
                         cache->plan.tile_size == settings.tile_size &&
                         cache->final_transmittance.size() == pixel_grad.pixel_count();
  if (!use_cache) local_plan = build_plan(model, k, settings);
  const RasterPlan& plan = use_cache ? cache->plan : local_plan;

  const double bg[3] = {model.background[0], model.background[1], model.background[2]};
  std::vector<EntryGrad> entry_grads(plan.tile_entries.size());
  const std::uint32_t width = plan.width;
  const double alpha_max = settings.alpha_max;

  parallel_for(plan.tile_count(), [&](std::size_t tile) {
    const detail::TileRect rect = detail::tile_rect(plan, tile);
    const std::int32_t tw = rect.width();
    const std::size_t n_pix = static_cast<std::size_t>(tw) * rect.height();
    const std::uint32_t begin = plan.tile_offsets[tile];
    const std::uint32_t n_entries = plan.tile_offsets[tile + 1] - begin;
    if (n_entries == 0) return;

    std::vector<double> trans(n_pix);
    std::vector<std::uint32_t> stop(n_pix);
    if (use_cache) {
      for (std::int32_t y = rect.y0; y < rect.y1; ++y) {
        for (std::int32_t x = rect.x0; x < rect.x1; ++x) {
          const std::size_t local = static_cast<std::size_t>(y - rect.y0) * tw + (x - rect.x0);
          const std::size_t global = static_cast<std::size_t>(y) * width + x;
          trans[local] = cache->final_transmittance[global];
          stop[local] = cache->stop[global];
        }
      }
    } else {
      std::vector<double> color(3 * n_pix);
      detail::composite_tile(plan, tile, settings, color.data(), trans.data(), stop.data());
    }

    // Back-to-front walk. accum holds the color composited behind the current
    // splat (background included), normalized by its transmittance.
    std::vector<double> accum(3 * n_pix);
    std::vector<double> grad(3 * n_pix);
    for (std::int32_t y = rect.y0; y < rect.y1; ++y) {
      for (std::int32_t x = rect.x0; x < rect.x1; ++x) {
        const std::size_t local = static_cast<std::size_t>(y - rect.y0) * tw + (x - rect.x0);
        for (std::size_t c = 0; c < 3; ++c) {
          accum[3 * local + c] = bg[c];
          grad[3 * local + c] = pixel_grad.at(x, y, c);
        }
      }
    }

    std::vector<double> alpha(tw);
    for (std::uint32_t jj = n_entries; jj-- > 0;) {
      const ProjectedSplat& s = plan.splats[plan.tile_entries[begin + jj]];
      EntryGrad& eg = entry_grads[begin + jj];
      const std::int32_t cx0 = std::max(s.x_lo, rect.x0);
      const std::int32_t cx1 = std::min(s.x_hi + 1, rect.x1);
      const std::int32_t cy0 = std::max(s.y_lo, rect.y0);
      const std::int32_t cy1 = std::min(s.y_hi + 1, rect.y1);
      if (cx0 >= cx1 || cy0 >= cy1) continue;
      const auto count = static_cast<std::size_t>(cx1 - cx0);
      for (std::int32_t y = cy0; y < cy1; ++y) {
        simd::splat_alpha_row(detail::row_params(s, y, settings), cx0, count, alpha.data());
        const double dy = (static_cast<double>(y) + 0.5) - s.mu_y;
        const std::size_t row_base = static_cast<std::size_t>(y - rect.y0) * tw + (cx0 - rect.x0);
        for (std::size_t i = 0; i < count; ++i) {
          const double a = alpha[i];
          if (a == 0.0) continue;
          const std::size_t pix = row_base + i;
          if (jj >= stop[pix]) continue;
          const double t = trans[pix] / (1.0 - a);  // transmittance in front of this splat
          trans[pix] = t;
          const double* g = &grad[3 * pix];
          double* acc = &accum[3 * pix];
          const double w = a * t;
          double d_alpha = 0.0;
          for (std::size_t c = 0; c < 3; ++c) {
            eg.color[c] += g[c] * w;
            d_alpha += g[c] * (s.color[c] - acc[c]);
            acc[c] = a * s.color[c] + (1.0 - a) * acc[c];
          }
          d_alpha *= t;
          if (a >= alpha_max) continue;  // clamped: constant in the parameters

          // alpha = opacity * exp(power); d alpha / d power = alpha.
          eg.opacity += d_alpha * a / s.opacity;
          const double d_power = d_alpha * a;
          const double dx = (static_cast<double>(cx0 + static_cast<std::int32_t>(i)) + 0.5) - s.mu_x;
          const double u = s.cos_theta * dx + s.sin_theta * dy;
          const double v = s.cos_theta * dy - s.sin_theta * dx;
          const double ui = u * s.inv_var0;
          const double vi = v * s.inv_var1;
          eg.mu_x += d_power * (ui * s.cos_theta - vi * s.sin_theta);
          eg.mu_y += d_power * (ui * s.sin_theta + vi * s.cos_theta);
          eg.ls0 += d_power * u * ui;
          eg.ls1 += d_power * v * vi;
          eg.theta += d_power * u * v * (s.inv_var1 - s.inv_var0);
        }
      }
    }
  });

  GradientBuffer out(model.size());
  // Fixed tile order keeps the sums independent of the worker count.
  for (std::size_t e = 0; e < plan.tile_entries.size(); ++e) {
    const ProjectedSplat& s = plan.splats[plan.tile_entries[e]];
    const EntryGrad& eg = entry_grads[e];
    SplatGrad& g = out.rows[s.storage_index];
    g.mu[0] += eg.mu_x;
    g.mu[1] += eg.mu_y;
    g.log_scale[0] += eg.ls0;
    g.log_scale[1] += eg.ls1;
    g.theta += eg.theta;
    g.opacity_raw += eg.opacity;
    for (std::size_t c = 0; c < 3; ++c) g.color_raw[c] += eg.color[c];
  }
  for (const ProjectedSplat& s : plan.splats) {
    SplatGrad& g = out.rows[s.storage_index];
    g.opacity_raw *= s.opacity * (1.0 - s.opacity);
    for (std::size_t c = 0; c < 3; ++c) g.color_raw[c] *= s.color[c] * (1.0 - s.color[c]);
  }
  return out;
}

double& param_ref(Splat& splat, Param param) noexcept {
  switch (param) {
    case Param::kMuX: return splat.mu[0];
    case Param::kMuY: return splat.mu[1];
    case Param::kLogScale0: return splat.log_scale[0];
    case Param::kLogScale1: return splat.log_scale[1];
    case Param::kTheta: return splat.theta;
    case Param::kOpacityRaw: return splat.opacity_raw;
    case Param::kColorR: return splat.color_raw[0];
    case Param::kColorG: return splat.color_raw[1];
    case Param::kColorB: return splat.color_raw[2];
  }
  return splat.mu[0];
}

double& grad_ref(SplatGrad& grad, Param param) noexcept {
  switch (param) {
    case Param::kMuX: return grad.mu[0];
    case Param::kMuY: return grad.mu[1];
    case Param::kLogScale0: return grad.log_scale[0];
    case Param::kLogScale1: return grad.log_scale[1];
    case Param::kTheta: return grad.theta;
    case Param::kOpacityRaw: return grad.opacity_raw;
    case Param::kColorR: return grad.color_raw[0];
    case Param::kColorG: return grad.color_raw[1];
    case Param::kColorB: return grad.color_raw[2];
  }
  return grad.mu[0];
}

double grad_value(const SplatGrad& grad, Param param) noexcept {
  return grad_ref(const_cast<SplatGrad&>(grad), param);
}

const char* to_string(Param param) noexcept {
  switch (param) {
    case Param::kMuX: return "mu_x";
    case Param::kMuY: return "mu_y";
    case Param::kLogScale0: return "log_scale_0";
    case Param::kLogScale1: return "log_scale_1";
    case Param::kTheta: return "theta";
    case Param::kOpacityRaw: return "opacity_raw";
    case Param::kColorR: return "color_raw_r";
    case Param::kColorG: return "color_raw_g";
    case Param::kColorB: return "color_raw_b";
  }
  return "?";
}

double fd_gradient(const SplatModel& model, std::size_t k, const RenderSettings& settings,
                   const ImageLoss& loss, ParamSelector selector, double h) {
  if (selector.splat >= model.size()) {
    fail(ErrorCode::kOutOfRange, "parameter selector names splat " + std::to_string(selector.splat));
  }
  SplatModel probe = model;
  double& p = param_ref(probe.splats[selector.splat], selector.param);
  const double p0 = p;
  p = p0 + h;
  const double plus = loss(render(probe, k, settings));
  p = p0 - h;
  const double minus = loss(render(probe, k, settings));
  return (plus - minus) / (2.0 * h);
}

}  // namespace mgs
