// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "mgs/image.hpp"
#include "mgs/loss.hpp"
#include "mgs/optim.hpp"
#include "mgs/render.hpp"
#include "mgs/rng.hpp"
#include "mgs/splat.hpp"

namespace mgs {

enum class BudgetMode { kStochastic, kMrlGrid, kFullOnly };

std::string_view to_string(BudgetMode mode) noexcept;
std::optional<BudgetMode> parse_budget_mode(std::string_view name) noexcept;

// Error-proportional relocation of near-transparent splats. Keeps N fixed.
struct RelocationConfig {
  bool enabled = false;
  double opacity_threshold = 0.005;
  std::int64_t interval = 500;
  double reset_scale = 2.0;  // scale given to relocated splats
  double color_clamp = 0.01;

  friend bool operator==(const RelocationConfig&, const RelocationConfig&) = default;
};

struct TrainConfig {
  std::int64_t iterations = 5000;
  double r_min = 0.05;
  LossConfig loss{};
  OrderingCriterion ordering{};
  std::int64_t reorder_interval = 1;
  LearningRates lr{};
  AdamConfig adam{};
  std::uint64_t seed = 0;
  RelocationConfig relocation{};
  BudgetMode budget_mode = BudgetMode::kStochastic;
  std::vector<double> mrl_ratios{0.125, 0.25, 0.5, 1.0};
  RenderSettings render{};
  std::int64_t log_interval = 1;

  // Throws kInvalidConfig.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainRecord {
  std::int64_t iteration = 0;
  std::size_t k = 0;
  double prefix_loss = 0.0;
  double full_loss = 0.0;
  double ms = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  // Columns: iteration,k,prefix_loss,full_loss,ms
  void write_csv(std::ostream& out) const;
};

// ceil(ratio * n) clamped to [1, n]. Products within 1e-9 (relative) of an
// integer are taken as that integer so decimal ratios such as 0.7 * 1000
// give the intended count.
std::size_t budget_from_ratio(double ratio, std::size_t n);

// k = ceil(r n) with r ~ Uniform(r_min, 1). Throws kInvalidConfig unless
// 0 < r_min <= 1 and n >= 1.
std::size_t sample_budget(Rng& rng, double r_min, std::size_t n);

// Prefix size used at step_index (1-based) under the configured mode. Draws
// from rng only in stochastic mode.
std::size_t choose_budget(const TrainConfig& cfg, Rng& rng, std::size_t n, std::int64_t step_index);

// One optimization step: two renders (prefix, full), the two-term loss, two
// backward passes, one Adam update, then reordering and relocation when due.
// Throws TrainingDiverged carrying step_index on a non-finite loss or gradient.
TrainRecord train_step(SplatModel& model, AdamState& state, const Image& target,
                       const TrainConfig& cfg, Rng& rng, std::int64_t step_index);

// Relocates every splat whose opacity is below the threshold to a pixel
// drawn with probability proportional to the per-pixel L1 error of the
// full render (uniform when the error is zero everywhere). current is the
// full render to use; when null the model is rendered. Returns the count.
std::size_t maintain_capacity(SplatModel& model, AdamState& state, const Image& target, Rng& rng,
                              const RelocationConfig& cfg, const RenderSettings& settings,
                              const Image* current = nullptr);

struct FitCallbacks {
  // Called after every checkpoint_interval steps (when > 0) with the model
  // as it stands after that step.
  std::int64_t checkpoint_interval = 0;
  std::function<void(std::int64_t step, const SplatModel&, const AdamState&)> on_checkpoint;
  std::function<void(const TrainRecord&)> on_record;
};

struct FitResult {
  SplatModel model;
  AdamState optimizer;
  TrainLog log;
};

// init_model, then cfg.iterations train steps, then a final reorder.
FitResult fit(const Image& target, const InitConfig& init_cfg, const TrainConfig& cfg,
              const FitCallbacks& callbacks = {});

}  // namespace mgs
