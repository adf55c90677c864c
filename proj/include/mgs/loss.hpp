// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mgs/image.hpp"

namespace mgs {

struct LossConfig {
  double lambda = 0.2;  // D-SSIM weight
  double gamma = 1.0;   // full-set weight
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  double l1_smooth_eps = 1e-8;

  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

// Value together with its gradient with respect to the first image.
struct LossValue {
  double value = 0.0;
  Image grad;
};

// Mean absolute difference. The gradient uses the smoothed sign
// x / sqrt(x^2 + eps^2).
LossValue l1(const Image& a, const Image& b, double smooth_eps = 1e-8);

// Mean SSIM over all valid Gaussian-window positions and the three channels
// (dynamic range 1). Throws kInvalidInput when the image is smaller than
// the window.
LossValue ssim(const Image& a, const Image& b, const LossConfig& cfg = {});
double ssim_index(const Image& a, const Image& b, const LossConfig& cfg = {});

// (1 - lambda) * l1 + lambda * (1 - ssim) / 2.
LossValue recon_loss(const Image& rendered, const Image& target, const LossConfig& cfg = {});

struct MgsLossValue {
  double value = 0.0;
  double prefix_loss = 0.0;
  double full_loss = 0.0;
  Image grad_prefix;
  Image grad_full;  // already scaled by gamma
};

// recon(prefix) + gamma * recon(full).
MgsLossValue mgs_loss(const Image& prefix_img, const Image& full_img, const Image& target,
                      const LossConfig& cfg = {});

}  // namespace mgs
