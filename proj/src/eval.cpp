// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mgs/errors.hpp"
#include "mgs/trainer.hpp"

namespace mgs {

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  const auto va = a.values();
  const auto vb = b.values();
  if (va.empty()) fail(ErrorCode::kInvalidInput, "psnr of empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(va.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double clamp_unit(double value, double lo, double hi) noexcept {
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

double quality_score(double psnr_db, double ssim_value, std::optional<double> lpips,
                     const QualityRanges& r) {
  const double p = clamp_unit(psnr_db, r.psnr_lo, r.psnr_hi);
  const double s = clamp_unit(ssim_value, r.ssim_lo, r.ssim_hi);
  if (lpips) {
    const double l = clamp_unit(*lpips, r.lpips_lo, r.lpips_hi);
    return (p + s + (1.0 - l)) / 3.0;
  }
  return (p + s) / 2.0;
}

std::vector<double> default_ratios() {
  return {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01};
}

std::vector<OperatingPoint> sweep(const SplatModel& model, const Image& target,
                                  const SweepOptions& options) {
  require_same_shape(Image(model.width, model.height), target, "sweep");
  if (options.ratios.empty()) fail(ErrorCode::kInvalidInput, "sweep needs at least one ratio");
  std::vector<OperatingPoint> points;
  points.reserve(options.ratios.size());
  for (double ratio : options.ratios) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
      fail(ErrorCode::kInvalidInput, "sweep ratio must lie in (0, 1], got " + std::to_string(ratio));
    }
    OperatingPoint pt;
    pt.ratio = ratio;
    pt.k = budget_from_ratio(ratio, model.size());
    TimedRender timed = render_timed(model, pt.k, options.render, options.repeats);
    pt.psnr = psnr(timed.image, target);
    pt.ssim = ssim_index(timed.image, target, options.ssim);
    pt.quality = quality_score(pt.psnr, pt.ssim);
    pt.median_ms = timed.median_ms;
    pt.fps = timed.median_ms > 0.0 ? 1000.0 / timed.median_ms
                                   : std::numeric_limits<double>::infinity();
    points.push_back(pt);
  }
  return points;
}

double Envelope::value_at(double x) const noexcept {
  for (const auto& s : segments) {
    if (x > s.x_start && x <= s.x_end) {
      if (s.q_start == s.q_end) return s.q_start;
      const double t = (x - s.x_start) / (s.x_end - s.x_start);
      return s.q_start + t * (s.q_end - s.q_start);
    }
  }
  return 0.0;
}

namespace {

struct AxisPoint {
  double x;
  double q;
};

void require_clip(double clip) {
  if (!(clip > 0.0) || !std::isfinite(clip)) fail(ErrorCode::kInvalidInput, "envelope clip must be positive");
}

// Extends the last piece when it is flat at the same quality.
void push_flat(Envelope& env, double x0, double x1, double q) {
  if (!env.segments.empty()) {
    auto& last = env.segments.back();
    if (last.q_start == q && last.q_end == q && last.x_end == x0) {
      last.x_end = x1;
      return;
    }
  }
  env.segments.push_back({x0, x1, q, q});
}

}  // namespace

Envelope envelope_fps(std::span<const OperatingPoint> points, double clip) {
  require_clip(clip);
  std::vector<AxisPoint> pts;
  for (const auto& p : points) {
    const double x = std::min(p.fps, clip);
    if (x > 0.0) pts.push_back({x, p.quality});
  }
  if (pts.empty()) fail(ErrorCode::kEmptyEnvelope, "no operating point with positive fps");
  std::sort(pts.begin(), pts.end(), [](const AxisPoint& a, const AxisPoint& b) { return a.x < b.x; });

  // Best quality among points at or above each distinct fps, from the right.
  std::vector<AxisPoint> steps;  // (distinct x, suffix max)
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = pts.size(); i-- > 0;) {
    best = std::max(best, pts[i].q);
    if (!steps.empty() && steps.back().x == pts[i].x) {
      steps.back().q = best;
    } else {
      steps.push_back({pts[i].x, best});
    }
  }
  std::reverse(steps.begin(), steps.end());

  Envelope env{EnvelopeAxis::kFps, clip, {}};
  double prev = 0.0;
  for (const auto& s : steps) {
    push_flat(env, prev, s.x, s.q);
    prev = s.x;
  }
  if (prev < clip) push_flat(env, prev, clip, 0.0);
  return env;
}

Envelope envelope_splats(std::span<const OperatingPoint> points, double clip) {
  require_clip(clip);
  std::vector<AxisPoint> pts;
  for (const auto& p : points) pts.push_back({std::min(static_cast<double>(p.k), clip), p.quality});
  if (pts.empty()) fail(ErrorCode::kEmptyEnvelope, "no operating points");
  std::sort(pts.begin(), pts.end(), [](const AxisPoint& a, const AxisPoint& b) { return a.x < b.x; });

  std::vector<AxisPoint> steps;  // (distinct x, prefix max)
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    best = std::max(best, p.q);
    if (!steps.empty() && steps.back().x == p.x) {
      steps.back().q = best;
    } else {
      steps.push_back({p.x, best});
    }
  }

  Envelope env{EnvelopeAxis::kSplats, clip, {}};
  const AxisPoint first = steps.front();
  if (first.x > 0.0) env.segments.push_back({0.0, first.x, 0.0, first.q});
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double end = i + 1 < steps.size() ? steps[i + 1].x : clip;
    if (end > steps[i].x) push_flat(env, steps[i].x, end, steps[i].q);
  }
  return env;
}

double auc(const Envelope& envelope) {
  double area = 0.0;
  for (const auto& s : envelope.segments) {
    area += (s.x_end - s.x_start) * (s.q_start + s.q_end) / 2.0;
  }
  return 100.0 * area / envelope.clip_max;
}

double auc_fps(std::span<const OperatingPoint> points, double clip) {
  try {
    return auc(envelope_fps(points, clip));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyEnvelope) return 0.0;
    throw;
  }
}

double auc_splats(std::span<const OperatingPoint> points, double clip) {
  try {
    return auc(envelope_splats(points, clip));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyEnvelope) return 0.0;
    throw;
  }
}

void write_points_csv(std::ostream& out, std::span<const OperatingPoint> points) {
  const bool with_lpips =
      std::any_of(points.begin(), points.end(), [](const OperatingPoint& p) { return p.lpips.has_value(); });
  out << "ratio,k,psnr,ssim," << (with_lpips ? "lpips," : "") << "quality,median_ms,fps\n";
  const auto old = out.precision(17);
  for (const auto& p : points) {
    out << p.ratio << ',' << p.k << ',' << p.psnr << ',' << p.ssim << ',';
    if (with_lpips) {
      if (p.lpips) out << *p.lpips;
      out << ',';
    }
    out << p.quality << ',' << p.median_ms << ',' << p.fps << '\n';
  }
  out.precision(old);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& what) {
  fail(ErrorCode::kParse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

double parse_number(const std::string& text, std::size_t line, std::size_t column) {
  const std::string t = trim(text);
  if (t.empty()) parse_fail(line, column, "empty field");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    parse_fail(line, column, "not a number: '" + t + "'");
  }
  if (used != t.size()) parse_fail(line, column, "not a number: '" + t + "'");
  return v;
}

}  // namespace

std::vector<OperatingPoint> read_points_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) return {};

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    static const char* known[] = {"ratio", "k", "psnr", "ssim", "lpips", "quality", "median_ms", "fps"};
    if (std::find(std::begin(known), std::end(known), name) == std::end(known)) {
      parse_fail(line_no, i + 1, "unknown column '" + name + "'");
    }
    if (!col.emplace(name, i).second) parse_fail(line_no, i + 1, "duplicate column '" + name + "'");
  }
  for (const char* required : {"k", "quality", "fps"}) {
    if (!col.count(required)) parse_fail(line_no, 1, std::string("missing required column '") + required + "'");
  }

  std::vector<OperatingPoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      parse_fail(line_no, std::min(cells.size(), header.size()) + 1,
                 "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    OperatingPoint p;
    auto number = [&](const char* name) -> std::optional<double> {
      const auto it = col.find(name);
      if (it == col.end()) return std::nullopt;
      return parse_number(cells[it->second], line_no, it->second + 1);
    };
    if (auto v = number("ratio")) p.ratio = *v;
    const double k = *number("k");
    if (k < 0.0 || k != std::floor(k)) parse_fail(line_no, col["k"] + 1, "k must be a non-negative integer");
    p.k = static_cast<std::size_t>(k);
    if (auto v = number("psnr")) p.psnr = *v;
    if (auto v = number("ssim")) p.ssim = *v;
    if (auto it = col.find("lpips"); it != col.end() && !trim(cells[it->second]).empty()) {
      p.lpips = parse_number(cells[it->second], line_no, it->second + 1);
    }
    p.quality = *number("quality");
    if (!(p.quality >= 0.0 && p.quality <= 1.0)) parse_fail(line_no, col["quality"] + 1, "quality must lie in [0, 1]");
    if (auto v = number("median_ms")) p.median_ms = *v;
    p.fps = *number("fps");
    if (std::isnan(p.fps) || p.fps < 0.0) parse_fail(line_no, col["fps"] + 1, "fps must be non-negative");
    points.push_back(p);
  }
  return points;
}

AucReport make_auc_report(std::span<const OperatingPoint> points, double clip_fps, double clip_splats) {
  AucReport r;
  r.clip_fps = clip_fps;
  r.clip_splats = clip_splats;
  r.point_count = points.size();
  if (!points.empty()) {
    auto has_fps = std::any_of(points.begin(), points.end(), [](const OperatingPoint& p) { return p.fps > 0.0; });
    if (has_fps) {
      r.fps_envelope = envelope_fps(points, clip_fps);
      r.auc_fps = auc(*r.fps_envelope);
    }
    r.splat_envelope = envelope_splats(points, clip_splats);
    r.auc_splats = auc(*r.splat_envelope);
  }
  return r;
}

void write_auc_report(std::ostream& out, const AucReport& report) {
  auto segments = [](const std::optional<Envelope>& env) {
    nlohmann::json arr = nlohmann::json::array();
    if (env) {
      for (const auto& s : env->segments) arr.push_back({s.x_start, s.x_end, s.q_start, s.q_end});
    }
    return arr;
  };
  nlohmann::json j;
  j["auc_fps"] = report.auc_fps;
  j["auc_splats"] = report.auc_splats;
  j["clip_fps"] = report.clip_fps;
  j["clip_splats"] = report.clip_splats;
  j["points"] = report.point_count;
  j["envelope_fps"] = segments(report.fps_envelope);
  j["envelope_splats"] = segments(report.splat_envelope);
  out << j.dump(2) << '\n';
}

}  // namespace mgs
