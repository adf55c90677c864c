// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mgs/errors.hpp"
#include "mgs/rng.hpp"

namespace mgs {

namespace {

using Rgb = std::array<double, 3>;

Rgb random_color(Rng& rng) { return {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)}; }

void blend(Image& img, std::int64_t x, std::int64_t y, const Rgb& c, double a) {
  for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = (1.0 - a) * img.at(x, y, ch) + a * c[ch];
}

}  // namespace

Image reference_image(std::uint32_t width, std::uint32_t height, std::uint64_t seed) {
  if (width == 0 || height == 0) fail(ErrorCode::kInvalidParameter, "image dimensions must be positive");
  Rng rng(seed);
  Image img(width, height);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);

  const Rgb top = random_color(rng);
  const Rgb bottom = random_color(rng);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const double t = (y + 0.5) / h;
      const double s = (x + 0.5) / w;
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = (1.0 - t) * top[c] + t * bottom[c] + 0.08 * (s - 0.5);
      }
    }
  }

  const int ellipses = 6;
  for (int e = 0; e < ellipses; ++e) {
    const double cx = rng.uniform(0.1, 0.9) * w;
    const double cy = rng.uniform(0.1, 0.9) * h;
    const double ra = rng.uniform(0.05, 0.22) * w;
    const double rb = rng.uniform(0.04, 0.15) * h;
    const double th = rng.uniform(0.0, std::numbers::pi);
    const Rgb col = random_color(rng);
    const double ct = std::cos(th);
    const double st = std::sin(th);
    for (std::int64_t y = 0; y < height; ++y) {
      for (std::int64_t x = 0; x < width; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double u = (ct * dx + st * dy) / ra;
        const double v = (ct * dy - st * dx) / rb;
        const double r = std::sqrt(u * u + v * v);
        const double a = std::clamp((1.0 - r) * 6.0, 0.0, 1.0);
        if (a > 0.0) blend(img, x, y, col, 0.85 * a);
      }
    }
  }

  const int boxes = 4;
  for (int b = 0; b < boxes; ++b) {
    const auto x0 = static_cast<std::int64_t>(rng.uniform(0.0, 0.8) * w);
    const auto y0 = static_cast<std::int64_t>(rng.uniform(0.0, 0.8) * h);
    const auto bw = static_cast<std::int64_t>(rng.uniform(0.08, 0.25) * w) + 1;
    const auto bh = static_cast<std::int64_t>(rng.uniform(0.08, 0.25) * h) + 1;
    const Rgb col = random_color(rng);
    for (std::int64_t y = y0; y < std::min<std::int64_t>(height, y0 + bh); ++y) {
      for (std::int64_t x = x0; x < std::min<std::int64_t>(width, x0 + bw); ++x) blend(img, x, y, col, 0.9);
    }
  }

  const double freq = rng.uniform(0.3, 0.6);
  const auto sx0 = static_cast<std::int64_t>(rng.uniform(0.0, 0.6) * w);
  const auto sy0 = static_cast<std::int64_t>(rng.uniform(0.0, 0.6) * h);
  const std::int64_t side = std::max<std::int64_t>(1, width / 4);
  const Rgb dark = {0.1, 0.1, 0.12};
  for (std::int64_t y = sy0; y < std::min<std::int64_t>(height, sy0 + side); ++y) {
    for (std::int64_t x = sx0; x < std::min<std::int64_t>(width, sx0 + side); ++x) {
      if (std::sin(freq * static_cast<double>(x + y)) > 0.0) blend(img, x, y, dark, 0.6);
    }
  }

  for (double& v : img.values()) v = std::clamp(v + rng.uniform(-0.02, 0.02), 0.0, 1.0);
  return img;
}

}  // namespace mgs
