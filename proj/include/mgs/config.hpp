// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgs/eval.hpp"
#include "mgs/optim.hpp"
#include "mgs/trainer.hpp"

namespace mgs {

struct EvalConfig {
  std::vector<double> ratios = default_ratios();
  double clip_fps = kDefaultFpsClip;
  double clip_splats = kDefaultSplatClip;
  int repeats = 3;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

// Everything a run needs. Every field has a default; the JSON form uses the
// sections seed, output_dir, checkpoint_interval, init, train, loss, render,
// eval and ablate. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "mgs_out";
  std::int64_t checkpoint_interval = 1000;  // 0 disables periodic checkpoints
  InitConfig init{};
  TrainConfig train{};  // train.loss and train.render map to the loss/render sections
  EvalConfig eval{};
  std::vector<std::string> ablate_variants;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws kInvalidConfig naming the offending key path.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

// Applies one ablation variant to a training config. A variant is one or
// more '+'-joined tokens:
//   opacity_desc, opacity_asc, area_desc, area_asc, color_energy_desc,
//   color_energy_asc, color_variance_desc, color_variance_asc,
//   fixed_append, fixed_prepend         ordering criterion
//   prefix_full, prefix_only, mrl, full_only   budget training
//   gamma=G                             full-set weight
//   ratio=A:B                           prefix:full weights, gamma = B / A
// Throws kInvalidConfig for unknown tokens.
void apply_variant(const std::string& variant, TrainConfig& cfg);

// Optimizer sidecar written next to a checkpoint: Adam state in storage
// order plus the echoed run config.
void write_optimizer_sidecar(const std::filesystem::path& path, const AdamState& state,
                             const RunConfig& cfg);
AdamState read_optimizer_sidecar(const std::filesystem::path& path);

}  // namespace mgs
