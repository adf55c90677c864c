// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgs/criterion.hpp"
#include "mgs/splat.hpp"

namespace mgs {

// Per-splat importance on activated parameters, in storage order:
//   opacity         sigma
//   area            pi * s0 * s1
//   color_energy    |C|^2
//   color_variance  population variance of (R, G, B)
//   fixed_append    -id  (descending sort gives ascending ids)
//   fixed_prepend   id
std::vector<double> importance(const SplatModel& model, const OrderingCriterion& criterion);

// Score that storage order keeps non-increasing: importance for descending
// criteria, its negation for ascending ones.
std::vector<double> rank_keys(const SplatModel& model, const OrderingCriterion& criterion);

// perm[new_index] = old_index.
using Permutation = std::vector<std::size_t>;

// Stable sort of the storage order by rank key, non-increasing; ties keep
// their previous relative order. Sets model.criterion. Throws
// kInvalidModel for non-finite scores.
Permutation reorder(SplatModel& model, const OrderingCriterion& criterion);

bool is_identity(const Permutation& perm) noexcept;

template <typename T>
void apply_permutation(std::vector<T>& values, const Permutation& perm) {
  std::vector<T> out;
  out.reserve(perm.size());
  for (std::size_t old_index : perm) out.push_back(std::move(values[old_index]));
  values = std::move(out);
}

}  // namespace mgs
