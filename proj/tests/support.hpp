// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "mgs/image.hpp"
#include "mgs/render.hpp"
#include "mgs/rng.hpp"
#include "mgs/splat.hpp"

namespace mgs::testing {

// Straight per-pixel evaluation of front-to-back compositing. Uses the
// explicit covariance inverse rather than the rotated frame.
inline Image oracle_render(const SplatModel& model, std::size_t k, const RenderSettings& s = {}) {
  std::vector<const Splat*> order;
  for (std::size_t i = 0; i < k; ++i) order.push_back(&model.splats[i]);
  std::sort(order.begin(), order.end(), [](const Splat* a, const Splat* b) {
    return a->depth != b->depth ? a->depth < b->depth : a->id < b->id;
  });
  Image out(model.width, model.height);
  for (std::uint32_t y = 0; y < model.height; ++y) {
    for (std::uint32_t x = 0; x < model.width; ++x) {
      double c[3] = {0, 0, 0};
      double t = 1.0;
      for (const Splat* sp : order) {
        const Mat2 cov = covariance(*sp);
        const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        const double i00 = cov[1][1] / det, i01 = -cov[0][1] / det, i11 = cov[0][0] / det;
        const double dx = x + 0.5 - sp->mu[0];
        const double dy = y + 0.5 - sp->mu[1];
        const Vec2 sc = sp->scale();
        const double r = s.radius_sigmas * std::max(sc[0], sc[1]);
        if (dx * dx + dy * dy > r * r) continue;
        const double q = dx * dx * i00 + 2.0 * dx * dy * i01 + dy * dy * i11;
        const double a = std::min(sp->opacity() * std::exp(-0.5 * q), s.alpha_max);
        if (a < s.alpha_min) continue;
        const Vec3 col = sp->color();
        for (int ch = 0; ch < 3; ++ch) c[ch] += col[ch] * a * t;
        t *= 1.0 - a;
        if (t < s.transmittance_min) break;
      }
      for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = c[ch] + t * model.background[ch];
    }
  }
  return out;
}

struct SceneSpec {
  std::size_t splats = 4;
  std::uint32_t width = 32;
  std::uint32_t height = 32;
  double min_scale = 1.0;
  double max_scale = 5.0;
  double opacity_raw_range = 2.0;
};

inline SplatModel random_scene(Rng& rng, const SceneSpec& spec) {
  SplatModel m;
  m.width = spec.width;
  m.height = spec.height;
  m.background = {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                  static_cast<float>(rng.uniform())};
  for (std::size_t i = 0; i < spec.splats; ++i) {
    Splat s;
    s.id = i;
    s.mu = {rng.uniform(0.0, spec.width), rng.uniform(0.0, spec.height)};
    s.log_scale = {std::log(rng.uniform(spec.min_scale, spec.max_scale)),
                   std::log(rng.uniform(spec.min_scale, spec.max_scale))};
    s.theta = rng.uniform(0.0, std::numbers::pi);
    s.opacity_raw = rng.uniform(-spec.opacity_raw_range, spec.opacity_raw_range);
    s.color_raw = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    s.depth = rng.uniform();
    m.splats.push_back(s);
  }
  return m;
}

// True when no pixel sits within `margin` (relative) of the support radius,
// the alpha floor, the alpha clamp or the transmittance stop.
inline bool clear_of_cutoffs(const SplatModel& model, const RenderSettings& s, double margin) {
  std::vector<const Splat*> order;
  for (const auto& sp : model.splats) order.push_back(&sp);
  std::sort(order.begin(), order.end(), [](const Splat* a, const Splat* b) {
    return a->depth != b->depth ? a->depth < b->depth : a->id < b->id;
  });
  auto near = [margin](double v, double edge) { return std::abs(v - edge) <= margin * edge; };
  for (std::uint32_t y = 0; y < model.height; ++y) {
    for (std::uint32_t x = 0; x < model.width; ++x) {
      double t = 1.0;
      for (const Splat* sp : order) {
        const Vec2 sc = sp->scale();
        const double dx = x + 0.5 - sp->mu[0];
        const double dy = y + 0.5 - sp->mu[1];
        const double r = s.radius_sigmas * std::max(sc[0], sc[1]);
        const double d2 = dx * dx + dy * dy;
        if (near(d2, r * r)) return false;
        if (d2 > r * r) continue;
        const double c = std::cos(sp->theta), sn = std::sin(sp->theta);
        const double u = c * dx + sn * dy, v = c * dy - sn * dx;
        const double a = sp->opacity() * std::exp(-0.5 * (u * u / (sc[0] * sc[0]) + v * v / (sc[1] * sc[1])));
        if (near(a, s.alpha_min) || near(a, s.alpha_max) || a > s.alpha_max) return false;
        if (a < s.alpha_min) continue;
        t *= 1.0 - a;
        if (near(t, s.transmittance_min)) return false;
        if (t < s.transmittance_min) break;
      }
    }
  }
  return true;
}

inline SplatModel clear_scene(Rng& rng, const SceneSpec& spec, const RenderSettings& s = {},
                              double margin = 2e-3) {
  for (;;) {
    SplatModel m = random_scene(rng, spec);
    if (clear_of_cutoffs(m, s, margin)) return m;
  }
}

inline Image random_image(Rng& rng, std::uint32_t w, std::uint32_t h) {
  Image img(w, h);
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.value_count(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace mgs::testing
