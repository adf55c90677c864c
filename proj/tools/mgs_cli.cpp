// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgs/checkpoint.hpp"
#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/eval.hpp"
#include "mgs/png_io.hpp"
#include "mgs/render.hpp"
#include "mgs/scene.hpp"
#include "mgs/trainer.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kMissingInput = 2,
  kDiverged = 3,
  kPartialFailure = 4,
  kUsage = 64,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw MissingInput(std::string(what) + " not found: " + path.string());
}

std::string step_name(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06lld", static_cast<long long>(step));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) mgs::fail(mgs::ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
}

mgs::SweepOptions sweep_options(const mgs::RunConfig& cfg) {
  mgs::SweepOptions opts;
  opts.ratios = cfg.eval.ratios;
  opts.render = cfg.train.render;
  opts.ssim = cfg.train.loss;
  opts.repeats = cfg.eval.repeats;
  return opts;
}

struct SweepOutput {
  std::vector<mgs::OperatingPoint> points;
  mgs::AucReport report;
};

SweepOutput run_sweep(const mgs::SplatModel& model, const mgs::Image& target,
                      const mgs::RunConfig& cfg, const fs::path& csv_path,
                      const fs::path& report_path) {
  SweepOutput out;
  out.points = mgs::sweep(model, target, sweep_options(cfg));
  out.report = mgs::make_auc_report(out.points, cfg.eval.clip_fps, cfg.eval.clip_splats);
  std::ostringstream csv;
  mgs::write_points_csv(csv, out.points);
  write_text(csv_path, csv.str());
  std::ostringstream rep;
  mgs::write_auc_report(rep, out.report);
  write_text(report_path, rep.str());
  return out;
}

// Trains one configuration into out_dir. Returns the final model; throws on
// divergence after the last periodic checkpoint has been written.
mgs::FitResult run_fit(const mgs::Image& target, const mgs::RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir / "checkpoints");
  mgs::save_run_config(out_dir / "config.json", cfg);

  mgs::FitCallbacks callbacks;
  callbacks.checkpoint_interval = cfg.checkpoint_interval;
  std::optional<fs::path> last_good;
  callbacks.on_checkpoint = [&](std::int64_t step, const mgs::SplatModel& model,
                                const mgs::AdamState& state) {
    const fs::path base = out_dir / "checkpoints" / step_name(step);
    mgs::write_checkpoint(fs::path(base).replace_extension(".mgs"), model);
    mgs::write_optimizer_sidecar(fs::path(base).replace_extension(".optimizer.json"), state, cfg);
    last_good = fs::path(base).replace_extension(".mgs");
  };
  mgs::TrainLog log;
  callbacks.on_record = [&](const mgs::TrainRecord& r) { log.records.push_back(r); };

  auto flush_log = [&] {
    std::ostringstream csv;
    log.write_csv(csv);
    write_text(out_dir / "train_log.csv", csv.str());
  };

  try {
    mgs::FitResult result = mgs::fit(target, cfg.init, cfg.train, callbacks);
    flush_log();
    mgs::write_checkpoint(out_dir / "model.mgs", result.model);
    mgs::write_optimizer_sidecar(out_dir / "optimizer.json", result.optimizer, cfg);
    return result;
  } catch (const mgs::TrainingDiverged& e) {
    flush_log();
    std::cerr << "error: training diverged at step " << e.step() << ": " << e.what() << '\n';
    if (last_good) {
      std::cerr << "last good checkpoint: " << last_good->string() << '\n';
    } else {
      std::cerr << "no checkpoint was written before divergence\n";
    }
    throw;
  }
}

mgs::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return mgs::RunConfig{};
  require_file(path, "config");
  return mgs::load_run_config(path);
}

std::vector<double> parse_ratio_list(const std::string& text) {
  std::vector<double> ratios;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const double r = std::stod(cell, &used);
      if (used != cell.size() || !(r > 0.0 && r <= 1.0)) throw std::invalid_argument(cell);
      ratios.push_back(r);
    } catch (const std::exception&) {
      throw UsageError("--ratios expects comma-separated values in (0, 1], got '" + cell + "'");
    }
  }
  if (ratios.empty()) throw UsageError("--ratios must list at least one ratio");
  return ratios;
}

std::string sanitize(const std::string& variant) {
  std::string out = variant;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  }
  return out;
}

// fit ---------------------------------------------------------------------

struct FitArgs {
  std::string target;
  std::string config;
  std::string out;
  std::optional<std::int64_t> iterations;
  std::optional<std::uint64_t> seed;
};

int cmd_fit(const FitArgs& a) {
  if (!fs::is_regular_file(a.target)) {
    std::cerr << "error: target not found: " << a.target << '\n';
    return kMissingInput;
  }
  mgs::RunConfig cfg = load_config_or_default(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.iterations) cfg.train.iterations = *a.iterations;
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.train.seed = *a.seed;
  }
  cfg.validate();
  const mgs::Image target = mgs::read_png(a.target);
  const mgs::FitResult result = run_fit(target, cfg, cfg.output_dir);
  const mgs::Image full = mgs::render(result.model, result.model.size(), cfg.train.render);
  std::cout << "splats=" << result.model.size() << " iterations=" << cfg.train.iterations
            << " psnr=" << mgs::psnr(full, target) << '\n'
            << "wrote " << (fs::path(cfg.output_dir) / "model.mgs").string() << '\n';
  return kOk;
}

// render ------------------------------------------------------------------

struct RenderArgs {
  std::string checkpoint;
  std::optional<double> ratio;
  std::optional<std::size_t> k;
  std::string out;
  std::string target;
};

int cmd_render(const RenderArgs& a) {
  if (a.ratio.has_value() == a.k.has_value()) throw UsageError("render needs exactly one of --ratio or --k");
  require_file(a.checkpoint, "checkpoint");
  const mgs::SplatModel model = mgs::read_checkpoint(fs::path(a.checkpoint));
  std::size_t k = 0;
  if (a.ratio) {
    if (!(*a.ratio > 0.0 && *a.ratio <= 1.0)) throw UsageError("--ratio must lie in (0, 1]");
    k = mgs::budget_from_ratio(*a.ratio, model.size());
  } else {
    k = *a.k;
    if (k > model.size()) {
      throw UsageError("--k " + std::to_string(k) + " exceeds splat count " + std::to_string(model.size()));
    }
  }
  const mgs::Image img = mgs::render(model, k);
  mgs::write_png(a.out, img);
  std::cout << "k=" << k;
  if (!a.target.empty()) {
    require_file(a.target, "target");
    const mgs::Image target = mgs::read_png(a.target);
    const auto old = std::cout.precision(17);
    std::cout << " psnr=" << mgs::psnr(img, target);
    std::cout.precision(old);
  }
  std::cout << '\n';
  return kOk;
}

// sweep -------------------------------------------------------------------

struct SweepArgs {
  std::string checkpoint;
  std::string target;
  std::string ratios;
  std::string out = "points.csv";
  std::string report;
  std::string config;
  std::optional<double> clip_fps;
  std::optional<double> clip_splats;
  std::optional<int> repeats;
};

int cmd_sweep(const SweepArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.target, "target");
  mgs::RunConfig cfg = load_config_or_default(a.config);
  if (!a.ratios.empty()) cfg.eval.ratios = parse_ratio_list(a.ratios);
  if (a.clip_fps) cfg.eval.clip_fps = *a.clip_fps;
  if (a.clip_splats) cfg.eval.clip_splats = *a.clip_splats;
  if (a.repeats) cfg.eval.repeats = *a.repeats;
  cfg.validate();
  const mgs::SplatModel model = mgs::read_checkpoint(fs::path(a.checkpoint));
  const mgs::Image target = mgs::read_png(a.target);
  const fs::path report = a.report.empty() ? fs::path(a.out).replace_extension(".auc.json") : fs::path(a.report);
  const SweepOutput s = run_sweep(model, target, cfg, a.out, report);
  std::cout << "points=" << s.points.size() << " auc_fps=" << s.report.auc_fps
            << " auc_splats=" << s.report.auc_splats << '\n';
  return kOk;
}

// ablate ------------------------------------------------------------------

struct AblateArgs {
  std::string target;
  std::string config;
  std::string out;
  std::vector<std::string> variants;
  std::optional<std::int64_t> iterations;
};

int cmd_ablate(const AblateArgs& a) {
  if (!fs::is_regular_file(a.target)) {
    std::cerr << "error: target not found: " << a.target << '\n';
    return kMissingInput;
  }
  mgs::RunConfig base = load_config_or_default(a.config);
  if (!a.out.empty()) base.output_dir = a.out;
  if (a.iterations) base.train.iterations = *a.iterations;
  const std::vector<std::string> variants = a.variants.empty() ? base.ablate_variants : a.variants;
  if (variants.empty()) throw UsageError("ablate needs at least one variant (--variant or ablate.variants)");
  for (const auto& v : variants) {
    mgs::TrainConfig probe = base.train;
    try {
      mgs::apply_variant(v, probe);
    } catch (const mgs::Error& e) {
      throw UsageError(e.what());
    }
  }
  base.validate();
  const mgs::Image target = mgs::read_png(a.target);
  const fs::path root = base.output_dir;
  fs::create_directories(root);

  std::ostringstream merged;
  merged << "variant,psnr,ssim,auc_fps,auc_splats\n";
  merged.precision(17);
  std::vector<std::string> failures;
  for (const auto& v : variants) {
    mgs::RunConfig cfg = base;
    cfg.ablate_variants = {v};
    mgs::apply_variant(v, cfg.train);
    const fs::path dir = root / sanitize(v);
    std::cout << "variant " << v << " -> " << dir.string() << std::endl;
    try {
      const mgs::FitResult result = run_fit(target, cfg, dir);
      const SweepOutput s = run_sweep(result.model, target, cfg, dir / "points.csv", dir / "auc.json");
      const mgs::Image full = mgs::render(result.model, result.model.size(), cfg.train.render);
      merged << v << ',' << mgs::psnr(full, target) << ',' << mgs::ssim_index(full, target, cfg.train.loss)
             << ',' << s.report.auc_fps << ',' << s.report.auc_splats << '\n';
    } catch (const std::exception& e) {
      std::cerr << "error: variant " << v << " failed: " << e.what() << '\n';
      failures.push_back(v + ": " + e.what());
    }
  }
  write_text(root / "ablation.csv", merged.str());
  if (!failures.empty()) {
    std::string text;
    for (const auto& f : failures) text += f + '\n';
    write_text(root / "failures.txt", text);
    std::cerr << failures.size() << " of " << variants.size() << " variants failed\n";
    return kPartialFailure;
  }
  std::cout << "wrote " << (root / "ablation.csv").string() << '\n';
  return kOk;
}

// auc ---------------------------------------------------------------------

struct AucArgs {
  std::string points;
  double clip_fps = mgs::kDefaultFpsClip;
  double clip_splats = mgs::kDefaultSplatClip;
  std::string json;
};

int cmd_auc(const AucArgs& a) {
  require_file(a.points, "points file");
  if (!(a.clip_fps > 0.0) || !(a.clip_splats > 0.0)) throw UsageError("clip values must be positive");
  std::ifstream in(a.points);
  const std::vector<mgs::OperatingPoint> points = mgs::read_points_csv(in);
  if (points.empty()) std::cerr << "warning: no operating points in " << a.points << "; AUCs are 0\n";
  const mgs::AucReport report = mgs::make_auc_report(points, a.clip_fps, a.clip_splats);
  std::cout << "auc_fps=" << report.auc_fps << " auc_splats=" << report.auc_splats << '\n';
  if (!a.json.empty()) {
    std::ostringstream rep;
    mgs::write_auc_report(rep, report);
    write_text(a.json, rep.str());
  }
  return kOk;
}

// info --------------------------------------------------------------------

int cmd_info(const std::string& checkpoint) {
  require_file(checkpoint, "checkpoint");
  const mgs::SplatModel model = mgs::read_checkpoint(fs::path(checkpoint));
  double min_op = 1.0, max_op = 0.0, sum_op = 0.0;
  for (const auto& s : model.splats) {
    const double o = s.opacity();
    min_op = std::min(min_op, o);
    max_op = std::max(max_op, o);
    sum_op += o;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, model.size()));
  std::cout << "splats: " << model.size() << '\n'
            << "image: " << model.width << "x" << model.height << '\n'
            << "background: " << model.background[0] << ' ' << model.background[1] << ' '
            << model.background[2] << '\n'
            << "ordering: " << mgs::label(model.criterion) << '\n';
  if (!model.splats.empty()) {
    std::cout << "opacity: min " << min_op << " mean " << sum_op / n << " max " << max_op << '\n';
  }
  return kOk;
}

// scene -------------------------------------------------------------------

struct SceneArgs {
  std::string out;
  std::uint32_t width = 128;
  std::uint32_t height = 128;
  std::uint64_t seed = 7;
};

int cmd_scene(const SceneArgs& a) {
  mgs::write_png(a.out, mgs::reference_image(a.width, a.height, a.seed));
  std::cout << "wrote " << a.out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered 2D Gaussian splat fitting with nested prefix budgets"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Train an ordered splat model on a target image");
  fit->add_option("target", fit_args.target, "Target PNG")->required();
  fit->add_option("--config,-c", fit_args.config, "JSON run config");
  fit->add_option("--out,-o", fit_args.out, "Output directory (overrides output_dir)");
  fit->add_option("--iterations", fit_args.iterations, "Override train.iterations");
  fit->add_option("--seed", fit_args.seed, "Override seed");

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render a prefix of a checkpoint");
  render->add_option("checkpoint", render_args.checkpoint, "MGS1 checkpoint")->required();
  render->add_option("--ratio", render_args.ratio, "Keep ratio r; renders ceil(r N) splats");
  render->add_option("--k", render_args.k, "Prefix size");
  render->add_option("--out,-o", render_args.out, "Output PNG")->required();
  render->add_option("--target", render_args.target, "Print PSNR against this PNG");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Measure operating points and AUCs");
  sweep->add_option("checkpoint", sweep_args.checkpoint, "MGS1 checkpoint")->required();
  sweep->add_option("target", sweep_args.target, "Target PNG")->required();
  sweep->add_option("--ratios", sweep_args.ratios, "Comma-separated keep ratios");
  sweep->add_option("--out,-o", sweep_args.out, "Operating-point CSV")->capture_default_str();
  sweep->add_option("--report", sweep_args.report, "AUC report JSON (default: <out>.auc.json)");
  sweep->add_option("--config,-c", sweep_args.config, "JSON run config");
  sweep->add_option("--clip-fps", sweep_args.clip_fps, "FPS clip");
  sweep->add_option("--clip-splats", sweep_args.clip_splats, "Splat-count clip");
  sweep->add_option("--repeats", sweep_args.repeats, "Timed renders per point");

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Train and sweep a list of variants");
  ablate->add_option("target", ablate_args.target, "Target PNG")->required();
  ablate->add_option("--config,-c", ablate_args.config, "JSON run config");
  ablate->add_option("--out,-o", ablate_args.out, "Output directory (overrides output_dir)");
  ablate->add_option("--variant,-v", ablate_args.variants, "Variant (repeatable; replaces ablate.variants)");
  ablate->add_option("--iterations", ablate_args.iterations, "Override train.iterations");

  AucArgs auc_args;
  auto* auc = app.add_subcommand("auc", "Compute AUCs from an operating-point CSV");
  auc->add_option("points", auc_args.points, "Operating-point CSV")->required();
  auc->add_option("--clip-fps", auc_args.clip_fps, "FPS clip")->capture_default_str();
  auc->add_option("--clip-splats", auc_args.clip_splats, "Splat-count clip")->capture_default_str();
  auc->add_option("--json", auc_args.json, "Also write a JSON report");

  std::string info_checkpoint;
  auto* info = app.add_subcommand("info", "Describe a checkpoint");
  info->add_option("checkpoint", info_checkpoint, "MGS1 checkpoint")->required();

  SceneArgs scene_args;
  auto* scene = app.add_subcommand("scene", "Write the procedural reference image");
  scene->add_option("out", scene_args.out, "Output PNG")->required();
  scene->add_option("--width", scene_args.width)->capture_default_str();
  scene->add_option("--height", scene_args.height)->capture_default_str();
  scene->add_option("--seed", scene_args.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit) return cmd_fit(fit_args);
    if (*render) return cmd_render(render_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*ablate) return cmd_ablate(ablate_args);
    if (*auc) return cmd_auc(auc_args);
    if (*info) return cmd_info(info_checkpoint);
    if (*scene) return cmd_scene(scene_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const MissingInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMissingInput;
  } catch (const mgs::TrainingDiverged&) {
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
