// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "mgs/eval.hpp"

namespace mgs::testing {

// Envelope values straight from their definitions over the raw points.
inline double fps_envelope_at(const std::vector<OperatingPoint>& pts, double clip, double x) {
  double best = 0.0;
  for (const auto& p : pts) {
    if (std::min(p.fps, clip) >= x) best = std::max(best, p.quality);
  }
  return best;
}

inline double splat_envelope_at(const std::vector<OperatingPoint>& pts, double clip, double x) {
  double k0 = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) k0 = std::min(k0, std::min(static_cast<double>(p.k), clip));
  double q0 = 0.0, best = 0.0;
  for (const auto& p : pts) {
    const double k = std::min(static_cast<double>(p.k), clip);
    if (k == k0) q0 = std::max(q0, p.quality);
    if (k <= x) best = std::max(best, p.quality);
  }
  if (x < k0) return q0 * x / k0;
  return best;
}

// Normalized midpoint-rule area of f over (0, clip].
template <typename F>
double midpoint_auc(F&& f, double clip, std::size_t samples) {
  const double dx = clip / static_cast<double>(samples);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) sum += f((static_cast<double>(i) + 0.5) * dx);
  return 100.0 * sum * dx / clip;
}

}  // namespace mgs::testing
