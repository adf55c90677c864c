// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "mgs/simd/kernels.hpp"

namespace mgs::simd::scalar {

void splat_alpha_row(const AlphaRowParams& p, std::int64_t x_begin, std::size_t count,
                     double* alpha_out) {
  const double dy2 = p.dy * p.dy;
  const double sin_dy = p.sin_theta * p.dy;
  const double cos_dy = p.cos_theta * p.dy;
  for (std::size_t i = 0; i < count; ++i) {
    const double px = static_cast<double>(x_begin + static_cast<std::int64_t>(i)) + 0.5;
    const double dx = px - p.mu_x;
    const double dist2 = dx * dx + dy2;
    double alpha = 0.0;
    if (dist2 <= p.radius2) {
      const double u = p.cos_theta * dx + sin_dy;
      const double v = cos_dy - p.sin_theta * dx;
      const double power = -0.5 * (u * u * p.inv_var0 + v * v * p.inv_var1);
      alpha = std::min(p.opacity * std::exp(power), p.alpha_max);
      if (alpha < p.alpha_min) alpha = 0.0;
    }
    alpha_out[i] = alpha;
  }
}

void correlate_row(const double* in, std::size_t n_out, const double* taps, std::size_t n_taps,
                   double* out) {
  for (std::size_t i = 0; i < n_out; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n_taps; ++t) acc = acc + taps[t] * in[i + t];
    out[i] = acc;
  }
}

void correlate_columns(const double* in, std::size_t in_stride, std::size_t width,
                       std::size_t rows_out, const double* taps, std::size_t n_taps, double* out,
                       std::size_t out_stride) {
  for (std::size_t y = 0; y < rows_out; ++y) {
    double* row = out + y * out_stride;
    std::fill(row, row + width, 0.0);
    for (std::size_t t = 0; t < n_taps; ++t) {
      const double* src = in + (y + t) * in_stride;
      const double w = taps[t];
      for (std::size_t x = 0; x < width; ++x) row[x] = row[x] + w * src[x];
    }
  }
}

void exp(const double* in, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

const KernelTable& table() {
  static constexpr KernelTable kTable{&splat_alpha_row, &correlate_row, &correlate_columns, &exp};
  return kTable;
}

}  // namespace mgs::simd::scalar
