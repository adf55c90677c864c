// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <immintrin.h>

#include <algorithm>

#include "mgs/simd/kernels.hpp"

namespace mgs::simd::avx2 {
namespace {

// Cephes-style exp: range reduction by ln 2 split in two parts, then a
// (3,3) Pade form. Inputs are clamped to [-708, 709] so 2^n stays normal.
inline __m256d exp_pd(__m256d x) {
  const __m256d kLo = _mm256_set1_pd(-708.0);
  const __m256d kHi = _mm256_set1_pd(709.0);
  const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d kC1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878E-4);
  const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300E-2);
  const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910E-1);
  const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042E-6);
  const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192E-3);
  const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766E-1);
  const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000009E0);
  const __m256d kOne = _mm256_set1_pd(1.0);
  const __m256d kTwo = _mm256_set1_pd(2.0);

  x = _mm256_max_pd(_mm256_min_pd(x, kHi), kLo);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, kC1));
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, kC2));
  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_add_pd(_mm256_mul_pd(kP0, xx), kP1);
  px = _mm256_add_pd(_mm256_mul_pd(px, xx), kP2);
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_add_pd(_mm256_mul_pd(kQ0, xx), kQ1);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, xx), kQ2);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, xx), kQ3);
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_add_pd(kOne, _mm256_mul_pd(kTwo, r));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(bits));
}

struct AlphaLanes {
  explicit AlphaLanes(const AlphaRowParams& p)
      : mu_x(_mm256_set1_pd(p.mu_x)),
        dy2(_mm256_set1_pd(p.dy * p.dy)),
        sin_dy(_mm256_set1_pd(p.sin_theta * p.dy)),
        cos_dy(_mm256_set1_pd(p.cos_theta * p.dy)),
        cos_t(_mm256_set1_pd(p.cos_theta)),
        sin_t(_mm256_set1_pd(p.sin_theta)),
        inv0(_mm256_set1_pd(p.inv_var0)),
        inv1(_mm256_set1_pd(p.inv_var1)),
        opacity(_mm256_set1_pd(p.opacity)),
        radius2(_mm256_set1_pd(p.radius2)),
        alpha_min(_mm256_set1_pd(p.alpha_min)),
        alpha_max(_mm256_set1_pd(p.alpha_max)) {}

  // Alphas for the four pixels x0 .. x0+3.
  __m256d eval(std::int64_t x0) const {
    const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d px = _mm256_add_pd(
        _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x0)), lane), _mm256_set1_pd(0.5));
    const __m256d dx = _mm256_sub_pd(px, mu_x);
    const __m256d dist2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), dy2);
    const __m256d inside = _mm256_cmp_pd(dist2, radius2, _CMP_LE_OQ);
    if (_mm256_movemask_pd(inside) == 0) return _mm256_setzero_pd();
    const __m256d u = _mm256_add_pd(_mm256_mul_pd(cos_t, dx), sin_dy);
    const __m256d v = _mm256_sub_pd(cos_dy, _mm256_mul_pd(sin_t, dx));
    const __m256d quad = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(u, u), inv0),
                                       _mm256_mul_pd(_mm256_mul_pd(v, v), inv1));
    const __m256d power = _mm256_mul_pd(_mm256_set1_pd(-0.5), quad);
    const __m256d alpha = _mm256_min_pd(_mm256_mul_pd(opacity, exp_pd(power)), alpha_max);
    const __m256d keep = _mm256_and_pd(inside, _mm256_cmp_pd(alpha, alpha_min, _CMP_GE_OQ));
    return _mm256_and_pd(alpha, keep);
  }

  __m256d mu_x, dy2, sin_dy, cos_dy, cos_t, sin_t, inv0, inv1, opacity, radius2, alpha_min,
      alpha_max;
};

void splat_alpha_row(const AlphaRowParams& p, std::int64_t x_begin, std::size_t count,
                     double* alpha_out) {
  const AlphaLanes lanes(p);
  const std::size_t vec_end = count & ~std::size_t{3};
  for (std::size_t i = 0; i < vec_end; i += 4) {
    _mm256_storeu_pd(alpha_out + i, lanes.eval(x_begin + static_cast<std::int64_t>(i)));
  }
  if (vec_end < count) {
    // The tail also goes through the vector exp so a pixel's alpha does not
    // depend on its position within the row segment.
    double buffer[4];
    _mm256_storeu_pd(buffer, lanes.eval(x_begin + static_cast<std::int64_t>(vec_end)));
    std::copy(buffer, buffer + (count - vec_end), alpha_out + vec_end);
  }
}

void correlate_row(const double* in, std::size_t n_out, const double* taps, std::size_t n_taps,
                   double* out) {
  const std::size_t vec_end = n_out & ~std::size_t{3};
  for (std::size_t i = 0; i < vec_end; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t t = 0; t < n_taps; ++t) {
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[t]), _mm256_loadu_pd(in + i + t)));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (std::size_t i = vec_end; i < n_out; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n_taps; ++t) acc = acc + taps[t] * in[i + t];
    out[i] = acc;
  }
}

void correlate_columns(const double* in, std::size_t in_stride, std::size_t width,
                       std::size_t rows_out, const double* taps, std::size_t n_taps, double* out,
                       std::size_t out_stride) {
  const std::size_t vec_end = width & ~std::size_t{3};
  for (std::size_t y = 0; y < rows_out; ++y) {
    double* row = out + y * out_stride;
    for (std::size_t x = 0; x < vec_end; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t t = 0; t < n_taps; ++t) {
        const __m256d src = _mm256_loadu_pd(in + (y + t) * in_stride + x);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[t]), src));
      }
      _mm256_storeu_pd(row + x, acc);
    }
    for (std::size_t x = vec_end; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n_taps; ++t) acc = acc + taps[t] * in[(y + t) * in_stride + x];
      row[x] = acc;
    }
  }
}

void exp(const double* in, std::size_t n, double* out) {
  const std::size_t vec_end = n & ~std::size_t{3};
  for (std::size_t i = 0; i < vec_end; i += 4) {
    _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(in + i)));
  }
  if (vec_end < n) {
    double buffer[4] = {0.0, 0.0, 0.0, 0.0};
    std::copy(in + vec_end, in + n, buffer);
    _mm256_storeu_pd(buffer, exp_pd(_mm256_loadu_pd(buffer)));
    std::copy(buffer, buffer + (n - vec_end), out + vec_end);
  }
}

}  // namespace

const KernelTable* table() {
  static constexpr KernelTable kTable{&splat_alpha_row, &correlate_row, &correlate_columns, &exp};
  return &kTable;
}

}  // namespace mgs::simd::avx2
