// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/optim.hpp"

#include <cmath>
#include <string>

#include "mgs/errors.hpp"

namespace mgs {

double LearningRates::for_param(Param param) const noexcept {
  switch (param) {
    case Param::kMuX:
    case Param::kMuY: return mu;
    case Param::kLogScale0:
    case Param::kLogScale1: return log_scale;
    case Param::kTheta: return theta;
    case Param::kOpacityRaw: return opacity_raw;
    case Param::kColorR:
    case Param::kColorG:
    case Param::kColorB: return color_raw;
  }
  return 0.0;
}

void LearningRates::validate() const {
  for (Param p : kAllParams) {
    const double lr = for_param(p);
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
      fail(ErrorCode::kInvalidConfig, std::string("learning rate for ") + to_string(p) + " must be >= 0");
    }
  }
}

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) fail(ErrorCode::kInvalidConfig, "adam eps must be positive");
}

void AdamState::permute(const Permutation& perm) {
  if (perm.size() != m.size()) fail(ErrorCode::kInvalidInput, "permutation length mismatch");
  apply_permutation(m, perm);
  apply_permutation(v, perm);
}

void AdamState::reset(std::size_t index) {
  m.at(index) = SplatGrad{};
  v.at(index) = SplatGrad{};
}

void adam_update(std::span<Splat> params, const GradientBuffer& grads, AdamState& state,
                 const LearningRates& lrs, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.size()) {
    fail(ErrorCode::kInvalidInput, "adam_update: parameter, gradient and state lengths differ");
  }
  if (!grads.is_finite()) {
    throw TrainingDiverged(static_cast<std::int64_t>(state.step),
                           "training diverged: non-finite gradient at optimizer step " +
                               std::to_string(state.step));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (Param p : kAllParams) {
      const double g = grad_value(grads.rows[i], p);
      double& m = grad_ref(state.m[i], p);
      double& v = grad_ref(state.v[i], p);
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      param_ref(params[i], p) -= lrs.for_param(p) * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace mgs
