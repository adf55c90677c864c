// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mgs/errors.hpp"

namespace mgs {

std::vector<double> importance(const SplatModel& model, const OrderingCriterion& criterion) {
  std::vector<double> scores(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Splat& s = model.splats[i];
    switch (criterion.kind) {
      case ScoreKind::kOpacity:
        scores[i] = s.opacity();
        break;
      case ScoreKind::kArea: {
        const auto sc = s.scale();
        scores[i] = std::numbers::pi * sc[0] * sc[1];
        break;
      }
      case ScoreKind::kColorEnergy: {
        const auto c = s.color();
        scores[i] = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        break;
      }
      case ScoreKind::kColorVariance: {
        const auto c = s.color();
        const double mean = (c[0] + c[1] + c[2]) / 3.0;
        const double d0 = c[0] - mean, d1 = c[1] - mean, d2 = c[2] - mean;
        scores[i] = (d0 * d0 + d1 * d1 + d2 * d2) / 3.0;
        break;
      }
      case ScoreKind::kFixedAppend:
        scores[i] = -static_cast<double>(s.id);
        break;
      case ScoreKind::kFixedPrepend:
        scores[i] = static_cast<double>(s.id);
        break;
    }
  }
  return scores;
}

std::vector<double> rank_keys(const SplatModel& model, const OrderingCriterion& criterion) {
  std::vector<double> keys = importance(model, criterion);
  if (!criterion.is_fixed() && criterion.direction == SortDirection::kAscending) {
    for (double& k : keys) k = -k;
  }
  return keys;
}

Permutation reorder(SplatModel& model, const OrderingCriterion& criterion) {
  const std::vector<double> keys = rank_keys(model, criterion);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!std::isfinite(keys[i])) {
      fail(ErrorCode::kInvalidModel,
           "non-finite importance score for splat " + std::to_string(model.splats[i].id));
    }
  }
  Permutation perm(model.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  if (!is_identity(perm)) apply_permutation(model.splats, perm);
  model.criterion = criterion;
  return perm;
}

bool is_identity(const Permutation& perm) noexcept {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i) return false;
  }
  return true;
}

}  // namespace mgs
