// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgs/grad.hpp"
#include "mgs/ordering.hpp"
#include "mgs/splat.hpp"

namespace mgs {

struct LearningRates {
  double mu = 2e-3;
  double log_scale = 5e-3;
  double theta = 1e-3;
  double opacity_raw = 5e-2;
  double color_raw = 2.5e-2;

  double for_param(Param param) const noexcept;
  void validate() const;
  friend bool operator==(const LearningRates&, const LearningRates&) = default;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// First and second moments per splat, aligned with model storage order.
struct AdamState {
  std::vector<SplatGrad> m;
  std::vector<SplatGrad> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n), v(n) {}
  std::size_t size() const noexcept { return m.size(); }
  void permute(const Permutation& perm);
  void reset(std::size_t index);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam step over all splats. Throws TrainingDiverged
// (carrying the optimizer step) on non-finite gradients.
void adam_update(std::span<Splat> params, const GradientBuffer& grads, AdamState& state,
                 const LearningRates& lrs, const AdamConfig& cfg = {});

}  // namespace mgs
