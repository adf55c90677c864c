// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "mgs/errors.hpp"
#include "mgs/grad.hpp"
#include "mgs/ordering.hpp"

namespace mgs {

std::string_view to_string(BudgetMode mode) noexcept {
  switch (mode) {
    case BudgetMode::kStochastic: return "stochastic";
    case BudgetMode::kMrlGrid: return "mrl_grid";
    case BudgetMode::kFullOnly: return "full_only";
  }
  return "unknown";
}

std::optional<BudgetMode> parse_budget_mode(std::string_view name) noexcept {
  if (name == "stochastic") return BudgetMode::kStochastic;
  if (name == "mrl_grid") return BudgetMode::kMrlGrid;
  if (name == "full_only") return BudgetMode::kFullOnly;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (iterations < 0) fail(ErrorCode::kInvalidConfig, "iterations must be >= 0");
  if (!(r_min > 0.0 && r_min <= 1.0)) fail(ErrorCode::kInvalidConfig, "r_min must lie in (0, 1]");
  if (reorder_interval < 1) fail(ErrorCode::kInvalidConfig, "reorder_interval must be >= 1");
  if (log_interval < 1) fail(ErrorCode::kInvalidConfig, "log_interval must be >= 1");
  loss.validate();
  lr.validate();
  adam.validate();
  render.validate();
  if (budget_mode == BudgetMode::kMrlGrid) {
    if (mrl_ratios.empty()) fail(ErrorCode::kInvalidConfig, "mrl_ratios must not be empty");
    for (double r : mrl_ratios) {
      if (!(r > 0.0 && r <= 1.0)) fail(ErrorCode::kInvalidConfig, "mrl_ratios must lie in (0, 1]");
    }
  }
  if (relocation.enabled) {
    if (relocation.interval < 1) fail(ErrorCode::kInvalidConfig, "relocation interval must be >= 1");
    if (!(relocation.opacity_threshold > 0.0 && relocation.opacity_threshold < 1.0)) {
      fail(ErrorCode::kInvalidConfig, "relocation opacity_threshold must lie in (0, 1)");
    }
    if (!(relocation.reset_scale > 0.0)) fail(ErrorCode::kInvalidConfig, "reset_scale must be positive");
    if (!(relocation.color_clamp > 0.0 && relocation.color_clamp < 0.5)) {
      fail(ErrorCode::kInvalidConfig, "relocation color_clamp must lie in (0, 0.5)");
    }
  }
}

void TrainLog::write_csv(std::ostream& out) const {
  out << "iteration,k,prefix_loss,full_loss,ms\n";
  const auto old = out.precision(17);
  for (const auto& r : records) {
    out << r.iteration << ',' << r.k << ',' << r.prefix_loss << ',' << r.full_loss << ',' << r.ms
        << '\n';
  }
  out.precision(old);
}

std::size_t budget_from_ratio(double ratio, std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidInput, "model has no splats");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    fail(ErrorCode::kInvalidInput, "keep ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  const double x = ratio * static_cast<double>(n);
  const double nearest = std::nearbyint(x);
  const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::clamp(static_cast<std::size_t>(k), std::size_t{1}, n);
}

std::size_t sample_budget(Rng& rng, double r_min, std::size_t n) {
  if (!(r_min > 0.0 && r_min <= 1.0)) fail(ErrorCode::kInvalidConfig, "r_min must lie in (0, 1]");
  if (n == 0) fail(ErrorCode::kInvalidConfig, "model has no splats");
  const double r = r_min + (1.0 - r_min) * rng.uniform();
  return budget_from_ratio(r, n);
}

std::size_t choose_budget(const TrainConfig& cfg, Rng& rng, std::size_t n, std::int64_t step_index) {
  switch (cfg.budget_mode) {
    case BudgetMode::kStochastic:
      return sample_budget(rng, cfg.r_min, n);
    case BudgetMode::kMrlGrid: {
      const auto len = static_cast<std::int64_t>(cfg.mrl_ratios.size());
      const auto slot = static_cast<std::size_t>(((step_index - 1) % len + len) % len);
      return budget_from_ratio(cfg.mrl_ratios[slot], n);
    }
    case BudgetMode::kFullOnly:
      return n;
  }
  return n;
}

TrainRecord train_step(SplatModel& model, AdamState& state, const Image& target,
                       const TrainConfig& cfg, Rng& rng, std::int64_t step_index) {
  const auto start = std::chrono::steady_clock::now();
  if (target.width() != model.width || target.height() != model.height) {
    fail(ErrorCode::kInvalidInput, "target dimensions do not match the model canvas");
  }
  if (state.size() != model.size()) fail(ErrorCode::kInvalidInput, "optimizer state size mismatch");
  const std::size_t n = model.size();
  const std::size_t k = choose_budget(cfg, rng, n, step_index);

  LossConfig loss_cfg = cfg.loss;
  if (cfg.budget_mode == BudgetMode::kFullOnly) loss_cfg.gamma = 0.0;

  RenderCache prefix_cache;
  RenderCache full_cache;
  const Image prefix_img = render(model, k, cfg.render, &prefix_cache);
  const Image full_img = render(model, n, cfg.render, &full_cache);

  MgsLossValue loss = mgs_loss(prefix_img, full_img, target, loss_cfg);
  if (!std::isfinite(loss.value)) {
    throw TrainingDiverged(step_index,
                           "training diverged: non-finite loss at step " + std::to_string(step_index));
  }

  GradientBuffer grads = backward(model, k, cfg.render, loss.grad_prefix, &prefix_cache);
  grads += backward(model, n, cfg.render, loss.grad_full, &full_cache);
  try {
    adam_update(model.splats, grads, state, cfg.lr, cfg.adam);
  } catch (const TrainingDiverged&) {
    throw TrainingDiverged(step_index, "training diverged: non-finite gradient at step " +
                                           std::to_string(step_index));
  }
  for (const auto& s : model.splats) {
    if (!s.is_finite()) {
      throw TrainingDiverged(step_index, "training diverged: non-finite parameters at step " +
                                             std::to_string(step_index));
    }
  }

  if (step_index % cfg.reorder_interval == 0) state.permute(reorder(model, cfg.ordering));
  if (cfg.relocation.enabled && step_index % cfg.relocation.interval == 0) {
    maintain_capacity(model, state, target, rng, cfg.relocation, cfg.render, &full_img);
  }

  TrainRecord record;
  record.iteration = step_index;
  record.k = k;
  record.prefix_loss = loss.prefix_loss;
  record.full_loss = loss.full_loss;
  record.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::size_t maintain_capacity(SplatModel& model, AdamState& state, const Image& target, Rng& rng,
                              const RelocationConfig& cfg, const RenderSettings& settings,
                              const Image* current) {
  if (target.width() != model.width || target.height() != model.height) {
    fail(ErrorCode::kInvalidInput, "target dimensions do not match the model canvas");
  }
  if (state.size() != model.size()) fail(ErrorCode::kInvalidInput, "optimizer state size mismatch");
  std::vector<std::size_t> dead;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (model.splats[i].opacity() < cfg.opacity_threshold) dead.push_back(i);
  }
  if (dead.empty()) return 0;

  Image rendered;
  if (current == nullptr || !current->same_shape(target)) {
    rendered = render(model, model.size(), settings);
    current = &rendered;
  }
  const std::size_t n_pix = target.pixel_count();
  std::vector<double> cdf(n_pix);
  double total = 0.0;
  for (std::size_t p = 0; p < n_pix; ++p) {
    double e = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      e += std::abs(current->data()[3 * p + c] - target.data()[3 * p + c]);
    }
    total += e;
    cdf[p] = total;
  }

  const double log_scale = std::log(cfg.reset_scale);
  for (std::size_t i : dead) {
    std::size_t pix;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      pix = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      pix = std::min(pix, n_pix - 1);
    } else {
      pix = rng.below(n_pix);
    }
    const double px = static_cast<double>(pix % target.width());
    const double py = static_cast<double>(pix / target.width());
    Splat& s = model.splats[i];
    s.mu = {px + rng.uniform(), py + rng.uniform()};
    s.log_scale = {log_scale, log_scale};
    s.opacity_raw = 0.0;
    s.color_raw = color_raw_from_target(target, s.mu, cfg.color_clamp);
    state.reset(i);
  }
  return dead.size();
}

FitResult fit(const Image& target, const InitConfig& init_cfg, const TrainConfig& cfg,
              const FitCallbacks& callbacks) {
  cfg.validate();
  Rng rng(cfg.seed);
  FitResult result;
  result.model = init_model(init_cfg, rng, &target);
  result.model.criterion = cfg.ordering;
  result.optimizer = AdamState(result.model.size());
  for (std::int64_t step = 1; step <= cfg.iterations; ++step) {
    TrainRecord record = train_step(result.model, result.optimizer, target, cfg, rng, step);
    if (step % cfg.log_interval == 0 || step == cfg.iterations) {
      result.log.records.push_back(record);
      if (callbacks.on_record) callbacks.on_record(record);
    }
    if (callbacks.checkpoint_interval > 0 && step % callbacks.checkpoint_interval == 0 &&
        callbacks.on_checkpoint) {
      callbacks.on_checkpoint(step, result.model, result.optimizer);
    }
  }
  result.optimizer.permute(reorder(result.model, cfg.ordering));
  return result;
}

}  // namespace mgs
