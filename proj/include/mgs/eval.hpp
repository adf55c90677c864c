// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mgs/image.hpp"
#include "mgs/loss.hpp"
#include "mgs/render.hpp"
#include "mgs/splat.hpp"

namespace mgs {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) with peak 1, capped at kPsnrCap (identical images).
double psnr(const Image& a, const Image& b);

// Linear clamp ranges of the composite quality score.
struct QualityRanges {
  double psnr_lo = 14.0, psnr_hi = 32.0;
  double ssim_lo = 0.35, ssim_hi = 0.92;
  double lpips_lo = 0.06, lpips_hi = 0.60;
};

double clamp_unit(double value, double lo, double hi) noexcept;

// (p + s + (1 - l)) / 3 with clamped, normalized terms. Without LPIPS the
// score falls back to (p + s) / 2.
double quality_score(double psnr_db, double ssim_value, std::optional<double> lpips = std::nullopt,
                     const QualityRanges& ranges = {});

struct OperatingPoint {
  double ratio = 1.0;
  std::size_t k = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> lpips;
  double quality = 0.0;
  double median_ms = 0.0;
  double fps = 0.0;
};

// 1.0, 0.9, ..., 0.1, 0.05, 0.01.
std::vector<double> default_ratios();

struct SweepOptions {
  std::vector<double> ratios = default_ratios();
  RenderSettings render{};
  LossConfig ssim{};  // window parameters of the SSIM metric
  int repeats = 3;
};

// For each ratio: k = budget_from_ratio(ratio, N), a timed render, PSNR,
// SSIM and quality. Output follows the ratio order.
std::vector<OperatingPoint> sweep(const SplatModel& model, const Image& target,
                                  const SweepOptions& options);

enum class EnvelopeAxis { kFps, kSplats };

struct EnvelopeSegment {
  double x_start = 0.0;
  double x_end = 0.0;
  double q_start = 0.0;  // value at x_start (right limit)
  double q_end = 0.0;    // value at x_end (left limit); equals q_start for steps
};

// Piecewise-linear envelope covering (0, clip_max].
struct Envelope {
  EnvelopeAxis axis = EnvelopeAxis::kFps;
  double clip_max = 0.0;
  std::vector<EnvelopeSegment> segments;

  double value_at(double x) const noexcept;
};

inline constexpr double kDefaultFpsClip = 500.0;
inline constexpr double kDefaultSplatClip = 5'000'000.0;

// E(x) = max{quality : fps >= x} on (0, clip], 0 where no point qualifies.
// fps values are clipped to clip. Throws kEmptyEnvelope without points.
Envelope envelope_fps(std::span<const OperatingPoint> points, double clip = kDefaultFpsClip);

// Line from the origin to the lowest-budget point (k0, Q0), then
// E(x) = max{quality : k <= x} up to clip. k values are clipped to clip.
Envelope envelope_splats(std::span<const OperatingPoint> points, double clip = kDefaultSplatClip);

// 100 * integral / clip, integrated exactly per segment.
double auc(const Envelope& envelope);

// AUC of the respective envelope; 0 for an empty point set.
double auc_fps(std::span<const OperatingPoint> points, double clip = kDefaultFpsClip);
double auc_splats(std::span<const OperatingPoint> points, double clip = kDefaultSplatClip);

// Header: ratio,k,psnr,ssim[,lpips],quality,median_ms,fps. The lpips column
// is written only when some point carries a value.
void write_points_csv(std::ostream& out, std::span<const OperatingPoint> points);

// Reads the schema above; columns may appear in any order and lpips is
// optional. Throws kParse naming the line and column of the first problem.
std::vector<OperatingPoint> read_points_csv(std::istream& in);

struct AucReport {
  double auc_fps = 0.0;
  double auc_splats = 0.0;
  double clip_fps = kDefaultFpsClip;
  double clip_splats = kDefaultSplatClip;
  std::size_t point_count = 0;
  std::optional<Envelope> fps_envelope;
  std::optional<Envelope> splat_envelope;
};

AucReport make_auc_report(std::span<const OperatingPoint> points, double clip_fps,
                          double clip_splats);

// JSON text.
void write_auc_report(std::ostream& out, const AucReport& report);

}  // namespace mgs
