// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/loss.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mgs/errors.hpp"
#include "mgs/simd/kernels.hpp"

namespace mgs {

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorCode::kInvalidConfig, "lambda must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(ErrorCode::kInvalidConfig, "gamma must be >= 0");
  if (ssim_window < 1 || ssim_window % 2 == 0) {
    fail(ErrorCode::kInvalidConfig, "ssim_window must be a positive odd number");
  }
  if (!(ssim_sigma > 0.0)) fail(ErrorCode::kInvalidConfig, "ssim_sigma must be positive");
  if (!(ssim_k1 > 0.0 && ssim_k2 > 0.0)) fail(ErrorCode::kInvalidConfig, "ssim constants must be positive");
  if (!(l1_smooth_eps > 0.0)) fail(ErrorCode::kInvalidConfig, "l1_smooth_eps must be positive");
}

LossValue l1(const Image& a, const Image& b, double smooth_eps) {
  require_same_shape(a, b, "l1");
  LossValue out{0.0, Image(a.width(), a.height())};
  const auto va = a.values();
  const auto vb = b.values();
  auto g = out.grad.values();
  const double inv_n = va.empty() ? 0.0 : 1.0 / static_cast<double>(va.size());
  const double eps2 = smooth_eps * smooth_eps;
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += std::abs(d);
    g[i] = inv_n * d / std::sqrt(d * d + eps2);
  }
  out.value = sum * inv_n;
  return out;
}

namespace {

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(window);
  const int r = window / 2;
  double sum = 0.0;
  for (int t = 0; t < window; ++t) {
    const double d = t - r;
    taps[t] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[t];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable valid-region filter of a w x h plane.
class GaussianFilter {
 public:
  GaussianFilter(std::uint32_t width, std::uint32_t height, const LossConfig& cfg)
      : w_(width), h_(height), n_(cfg.ssim_window), taps_(gaussian_taps(cfg.ssim_window, cfg.ssim_sigma)) {
    vw_ = w_ - n_ + 1;
    vh_ = h_ - n_ + 1;
    scratch_.resize(static_cast<std::size_t>(h_) * std::max(vw_, w_ + n_ - 1));
  }

  std::size_t valid_width() const noexcept { return vw_; }
  std::size_t valid_height() const noexcept { return vh_; }
  std::size_t valid_size() const noexcept { return vw_ * vh_; }

  // in: w x h, out: vw x vh.
  void valid(const double* in, double* out) {
    for (std::size_t y = 0; y < h_; ++y) {
      simd::correlate_row(in + y * w_, vw_, taps_.data(), n_, scratch_.data() + y * vw_);
    }
    simd::correlate_columns(scratch_.data(), vw_, vw_, vh_, taps_.data(), n_, out, vw_);
  }

  // Transpose of valid(): in: vw x vh, out: w x h.
  void transpose(const double* in, double* out) {
    const std::size_t pad = n_ - 1;
    const std::size_t pw = vw_ + 2 * pad;  // == w + n - 1
    std::vector<double> padded(pw, 0.0);
    // Rows: full correlation of each valid row, giving vh x w.
    std::vector<double> rows(vh_ * w_);
    for (std::size_t y = 0; y < vh_; ++y) {
      std::copy(in + y * vw_, in + (y + 1) * vw_, padded.begin() + pad);
      simd::correlate_row(padded.data(), w_, taps_.data(), n_, rows.data() + y * w_);
    }
    // Columns: zero rows above and below, then a valid column pass.
    const std::size_t ph = vh_ + 2 * pad;
    std::vector<double> tall(ph * w_, 0.0);
    std::copy(rows.begin(), rows.end(), tall.begin() + pad * w_);
    simd::correlate_columns(tall.data(), w_, w_, h_, taps_.data(), n_, out, w_);
  }

 private:
  std::size_t w_, h_, n_, vw_ = 0, vh_ = 0;
  std::vector<double> taps_;
  std::vector<double> scratch_;
};

LossValue ssim_impl(const Image& a, const Image& b, const LossConfig& cfg, bool want_grad) {
  require_same_shape(a, b, "ssim");
  cfg.validate();
  const auto win = static_cast<std::uint32_t>(cfg.ssim_window);
  if (a.width() < win || a.height() < win) {
    fail(ErrorCode::kInvalidInput, "image " + std::to_string(a.width()) + "x" +
                                       std::to_string(a.height()) + " is smaller than the " +
                                       std::to_string(win) + "-pixel SSIM window");
  }
  const std::uint32_t w = a.width();
  const std::uint32_t h = a.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const double c1 = cfg.ssim_k1 * cfg.ssim_k1;
  const double c2 = cfg.ssim_k2 * cfg.ssim_k2;

  GaussianFilter filter(w, h, cfg);
  const std::size_t p = filter.valid_size();
  const double norm = 1.0 / (3.0 * static_cast<double>(p));

  LossValue out{0.0, want_grad ? Image(w, h) : Image()};
  std::vector<double> pa(n), pb(n), tmp(n);
  std::vector<double> mu_a(p), mu_b(p), e_aa(p), e_bb(p), e_ab(p);
  std::vector<double> m1, m2, m3, f(n);
  if (want_grad) {
    m1.resize(p);
    m2.resize(p);
    m3.resize(p);
  }

  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a.data()[3 * i + c];
      pb[i] = b.data()[3 * i + c];
    }
    filter.valid(pa.data(), mu_a.data());
    filter.valid(pb.data(), mu_b.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pa[i] * pa[i];
    filter.valid(tmp.data(), e_aa.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pb[i] * pb[i];
    filter.valid(tmp.data(), e_bb.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pa[i] * pb[i];
    filter.valid(tmp.data(), e_ab.data());

    double channel_sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double var_a = e_aa[i] - ma * ma;
      const double var_b = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      const double a1 = 2.0 * ma * mb + c1;
      const double a2 = 2.0 * cov + c2;
      const double b1 = ma * ma + mb * mb + c1;
      const double b2 = var_a + var_b + c2;
      const double s = (a1 * a2) / (b1 * b2);
      channel_sum += s;
      if (want_grad) {
        const double d_mu = 2.0 * mb * a2 / (b1 * b2) - s * 2.0 * ma / b1;
        const double d_var = -s / b2;
        const double d_cov = 2.0 * a1 / (b1 * b2);
        // Through var_a = E[a^2] - mu_a^2 and cov = E[ab] - mu_a mu_b.
        m1[i] = d_mu - 2.0 * ma * d_var - mb * d_cov;
        m2[i] = d_var;
        m3[i] = d_cov;
      }
    }
    total += channel_sum;

    if (want_grad) {
      double* g = out.grad.data();
      filter.transpose(m1.data(), f.data());
      for (std::size_t i = 0; i < n; ++i) g[3 * i + c] = f[i];
      filter.transpose(m2.data(), f.data());
      for (std::size_t i = 0; i < n; ++i) g[3 * i + c] += 2.0 * pa[i] * f[i];
      filter.transpose(m3.data(), f.data());
      for (std::size_t i = 0; i < n; ++i) {
        g[3 * i + c] += pb[i] * f[i];
        g[3 * i + c] *= norm;
      }
    }
  }
  out.value = total / (3.0 * static_cast<double>(p));
  return out;
}

}  // namespace

LossValue ssim(const Image& a, const Image& b, const LossConfig& cfg) {
  return ssim_impl(a, b, cfg, true);
}

double ssim_index(const Image& a, const Image& b, const LossConfig& cfg) {
  return ssim_impl(a, b, cfg, false).value;
}

LossValue recon_loss(const Image& rendered, const Image& target, const LossConfig& cfg) {
  cfg.validate();
  require_same_shape(rendered, target, "recon_loss");
  LossValue out{0.0, Image(rendered.width(), rendered.height())};
  auto g = out.grad.values();
  if (cfg.lambda < 1.0) {
    LossValue l = l1(rendered, target, cfg.l1_smooth_eps);
    out.value += (1.0 - cfg.lambda) * l.value;
    const auto lg = l.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += (1.0 - cfg.lambda) * lg[i];
  }
  if (cfg.lambda > 0.0) {
    LossValue s = ssim(rendered, target, cfg);
    out.value += cfg.lambda * (1.0 - s.value) / 2.0;
    const auto sg = s.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= cfg.lambda * 0.5 * sg[i];
  }
  return out;
}

MgsLossValue mgs_loss(const Image& prefix_img, const Image& full_img, const Image& target,
                      const LossConfig& cfg) {
  cfg.validate();
  LossValue lp = recon_loss(prefix_img, target, cfg);
  LossValue lf = recon_loss(full_img, target, cfg);
  MgsLossValue out;
  out.prefix_loss = lp.value;
  out.full_loss = lf.value;
  out.value = lp.value + cfg.gamma * lf.value;
  out.grad_prefix = std::move(lp.grad);
  out.grad_full = std::move(lf.grad);
  for (double& v : out.grad_full.values()) v *= cfg.gamma;
  return out;
}

}  // namespace mgs
