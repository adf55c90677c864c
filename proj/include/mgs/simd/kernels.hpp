// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops of the renderer and the SSIM filter. Each kernel
// has a scalar reference in simd::scalar and, where the build supports it,
// an AVX2 variant in simd::avx2. The unqualified entry points dispatch on the
// level selected at runtime (see dispatch.hpp).
//
// Variants evaluate the same sequence of IEEE operations; the only
// permitted difference is the exponential in splat_alpha_row, where the
// vector path uses a polynomial approximation accurate to a few ulp.

#include <cstddef>
#include <cstdint>

namespace mgs::simd {

// One splat evaluated along one pixel row.
struct AlphaRowParams {
  double mu_x = 0.0;
  double dy = 0.0;  // (y + 0.5) - mu_y
  double cos_theta = 1.0;
  double sin_theta = 0.0;
  double inv_var0 = 1.0;  // 1 / s0^2
  double inv_var1 = 1.0;  // 1 / s1^2
  double opacity = 0.0;
  double radius2 = 0.0;  // squared support radius
  double alpha_min = 1.0 / 255.0;
  double alpha_max = 0.999;
};

// alpha_out[i] for pixel x = x_begin + i:
//   dx = (x + 0.5) - mu_x
//   0                       if dx^2 + dy^2 > radius2
//   a = min(opacity * exp(-(p^2 inv_var0 + q^2 inv_var1) / 2), alpha_max)
//   0 if a < alpha_min, else a
// with p = cos*dx + sin*dy and q = cos*dy - sin*dx.
using SplatAlphaRowFn = void (*)(const AlphaRowParams& params, std::int64_t x_begin,
                                 std::size_t count, double* alpha_out);

// out[i] = sum_t taps[t] * in[i + t] for i < n_out, t ascending.
using CorrelateRowFn = void (*)(const double* in, std::size_t n_out, const double* taps,
                                std::size_t n_taps, double* out);

// out[y * out_stride + x] = sum_t taps[t] * in[(y + t) * in_stride + x]
// for y < rows_out, x < width.
using CorrelateColumnsFn = void (*)(const double* in, std::size_t in_stride, std::size_t width,
                                    std::size_t rows_out, const double* taps, std::size_t n_taps,
                                    double* out, std::size_t out_stride);

// out[i] = exp(in[i]).
using ExpFn = void (*)(const double* in, std::size_t n, double* out);

struct KernelTable {
  SplatAlphaRowFn splat_alpha_row;
  CorrelateRowFn correlate_row;
  CorrelateColumnsFn correlate_columns;
  ExpFn exp;
};

namespace scalar {
void splat_alpha_row(const AlphaRowParams& params, std::int64_t x_begin, std::size_t count,
                     double* alpha_out);
void correlate_row(const double* in, std::size_t n_out, const double* taps, std::size_t n_taps,
                   double* out);
void correlate_columns(const double* in, std::size_t in_stride, std::size_t width,
                       std::size_t rows_out, const double* taps, std::size_t n_taps, double* out,
                       std::size_t out_stride);
void exp(const double* in, std::size_t n, double* out);
const KernelTable& table();
}  // namespace scalar

namespace avx2 {
// nullptr when the build has no AVX2 variant.
const KernelTable* table();
}  // namespace avx2

const KernelTable& kernels();

inline void splat_alpha_row(const AlphaRowParams& params, std::int64_t x_begin, std::size_t count,
                            double* alpha_out) {
  kernels().splat_alpha_row(params, x_begin, count, alpha_out);
}
inline void correlate_row(const double* in, std::size_t n_out, const double* taps,
                          std::size_t n_taps, double* out) {
  kernels().correlate_row(in, n_out, taps, n_taps, out);
}
inline void correlate_columns(const double* in, std::size_t in_stride, std::size_t width,
                              std::size_t rows_out, const double* taps, std::size_t n_taps,
                              double* out, std::size_t out_stride) {
  kernels().correlate_columns(in, in_stride, width, rows_out, taps, n_taps, out, out_stride);
}

}  // namespace mgs::simd
