// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "auc_oracle.hpp"
#include "mgs/errors.hpp"
#include "mgs/eval.hpp"
#include "mgs/rng.hpp"
#include "mgs/trainer.hpp"
#include "support.hpp"

using namespace mgs;

namespace {

OperatingPoint fps_point(double quality, double fps, std::size_t k = 1) {
  OperatingPoint p;
  p.quality = quality;
  p.fps = fps;
  p.k = k;
  return p;
}

OperatingPoint k_point(std::size_t k, double quality) { return fps_point(quality, 1.0, k); }

std::vector<OperatingPoint> random_points(Rng& rng, double fps_cell, double k_cell, std::uint64_t cells) {
  std::vector<OperatingPoint> pts;
  const std::size_t n = 1 + rng.below(10);
  for (std::size_t i = 0; i < n; ++i) {
    OperatingPoint p;
    p.quality = rng.uniform();
    p.fps = fps_cell * static_cast<double>(1 + rng.below(cells + cells / 5));
    p.k = static_cast<std::size_t>(k_cell) * (1 + rng.below(cells + cells / 10));
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("psnr examples") {
  Rng rng(1);
  const Image a = testing::random_image(rng, 9, 7);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(Image(5, 5, 0.2), Image(5, 5, 0.3)) == doctest::Approx(20.0).epsilon(1e-12));
  const Image b = testing::random_image(rng, 9, 7);
  double sse = 0.0;
  for (std::uint32_t y = 0; y < 7; ++y) {
    for (std::uint32_t x = 0; x < 9; ++x) {
      for (int c = 0; c < 3; ++c) sse += std::pow(a.at(x, y, c) - b.at(x, y, c), 2);
    }
  }
  CHECK(std::abs(psnr(a, b) + 10.0 * std::log10(sse / (9 * 7 * 3))) < 1e-9);
  CHECK_THROWS_AS(psnr(a, Image(4, 4)), Error);
}

TEST_CASE("quality score corners and clamps") {
  CHECK(quality_score(32.0, 0.92, 0.06) == 1.0);
  CHECK(quality_score(14.0, 0.35, 0.60) == 0.0);
  CHECK(quality_score(50.0, 1.0, 0.0) == 1.0);
  CHECK(quality_score(3.0, 0.0, 1.0) == 0.0);
  CHECK(std::abs(clamp_unit(28.20, 14.0, 32.0) - 0.7889) < 1e-4);
  CHECK(quality_score(28.20, 0.35) == doctest::Approx(clamp_unit(28.20, 14.0, 32.0) / 2.0));
  CHECK(quality_score(23.0, 0.635, 0.33) == doctest::Approx(0.5));
}

TEST_CASE("default ratio grid and its prefix sizes") {
  const auto ratios = default_ratios();
  REQUIRE(ratios.size() == 12);
  const std::size_t expected[] = {1000, 900, 800, 700, 600, 500, 400, 300, 200, 100, 50, 10};
  for (std::size_t i = 0; i < ratios.size(); ++i) CHECK(budget_from_ratio(ratios[i], 1000) == expected[i]);
}

TEST_CASE("sweep measures every ratio") {
  Rng rng(2);
  testing::SceneSpec spec;
  spec.splats = 60;
  const SplatModel m = testing::random_scene(rng, spec);
  const Image target = testing::random_image(rng, spec.width, spec.height);
  SweepOptions one;
  one.ratios = {1.0};
  one.repeats = 1;
  const auto single = sweep(m, target, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].k == 60);
  CHECK(single[0].psnr == psnr(render(m, 60), target));

  SweepOptions all;
  all.repeats = 1;
  const auto pts = sweep(m, target, all);
  CHECK(pts.size() == 12);
  const auto again = sweep(m, target, all);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].k == again[i].k);
    CHECK(pts[i].psnr == again[i].psnr);
    CHECK(pts[i].ssim == again[i].ssim);
    CHECK(pts[i].quality == again[i].quality);
    CHECK(pts[i].fps > 0.0);
  }
}

TEST_CASE("fps envelope examples") {
  const std::vector<OperatingPoint> one{fps_point(0.8, 250)};
  const Envelope e = envelope_fps(one, 500);
  CHECK(e.value_at(1.0) == 0.8);
  CHECK(e.value_at(250.0) == 0.8);
  CHECK(e.value_at(250.5) == 0.0);
  CHECK(e.value_at(500.0) == 0.0);
  CHECK(auc(e) == 40.0);

  std::vector<OperatingPoint> dominated = one;
  dominated.push_back(fps_point(0.5, 100));
  CHECK(auc(envelope_fps(dominated, 500)) == 40.0);

  const std::vector<OperatingPoint> two{fps_point(0.9, 50), fps_point(0.6, 400)};
  const Envelope e2 = envelope_fps(two, 500);
  CHECK(e2.value_at(50.0) == 0.9);
  CHECK(e2.value_at(51.0) == 0.6);
  CHECK(e2.value_at(400.0) == 0.6);
  CHECK(e2.value_at(401.0) == 0.0);

  CHECK(auc_fps(std::vector<OperatingPoint>{fps_point(1.0, 500)}, 500) == 100.0);
  CHECK(auc_fps(std::vector<OperatingPoint>{fps_point(0.8, 900)}, 500) == 80.0);
}

TEST_CASE("splat envelope examples") {
  const std::vector<OperatingPoint> one{k_point(100, 0.5)};
  const Envelope e = envelope_splats(one, 1000);
  CHECK(e.value_at(50.0) == 0.25);
  CHECK(e.value_at(700.0) == 0.5);
  CHECK(auc(e) * 1000.0 / 100.0 == doctest::Approx(475.0).epsilon(1e-15));
  CHECK(auc(e) == 47.5);

  const std::vector<OperatingPoint> dom{k_point(100, 0.7), k_point(400, 0.6)};
  const Envelope ed = envelope_splats(dom, 1000);
  CHECK(ed.value_at(500.0) == 0.7);
  CHECK(auc(ed) == doctest::Approx(100.0 * (0.5 * 100 * 0.7 + 900 * 0.7) / 1000.0));

  const Envelope edge = envelope_splats(std::vector<OperatingPoint>{k_point(1000, 0.8)}, 1000);
  REQUIRE(edge.segments.size() == 1);
  CHECK(auc(edge) == doctest::Approx(40.0));
}

TEST_CASE("empty point sets") {
  const std::vector<OperatingPoint> none;
  CHECK_THROWS_AS(envelope_fps(none, 500), Error);
  CHECK_THROWS_AS(envelope_splats(none, 500), Error);
  CHECK(auc_fps(none) == 0.0);
  CHECK(auc_splats(none) == 0.0);
  const AucReport r = make_auc_report(none, 500, 1000);
  CHECK(r.auc_fps == 0.0);
  CHECK(r.auc_splats == 0.0);
  CHECK_THROWS_AS(envelope_fps(std::vector<OperatingPoint>{fps_point(0.5, 10)}, 0.0), Error);
}

TEST_CASE("envelopes integrate exactly against a midpoint oracle") {
  Rng rng(99);
  const std::size_t samples = 200000;
  const double fps_clip = 500.0, k_clip = 1e6;
  for (int set = 0; set < 15; ++set) {
    const auto pts = random_points(rng, fps_clip / samples, k_clip / samples, samples);
    const double fps_ref = testing::midpoint_auc(
        [&](double x) { return testing::fps_envelope_at(pts, fps_clip, x); }, fps_clip, samples);
    const double k_ref = testing::midpoint_auc(
        [&](double x) { return testing::splat_envelope_at(pts, k_clip, x); }, k_clip, samples);
    CHECK(std::abs(auc_fps(pts, fps_clip) - fps_ref) < 1e-7);
    CHECK(std::abs(auc_splats(pts, k_clip) - k_ref) < 1e-7);
  }
}

TEST_CASE("off-grid breakpoints stay within the midpoint error bound") {
  Rng rng(5);
  const std::size_t samples = 100000;
  for (int set = 0; set < 10; ++set) {
    std::vector<OperatingPoint> pts;
    for (int i = 0; i < 6; ++i) {
      pts.push_back(fps_point(rng.uniform(), rng.uniform(0.0, 600.0),
                              1 + static_cast<std::size_t>(rng.uniform(0.0, 6e6))));
    }
    const double fps_ref = testing::midpoint_auc(
        [&](double x) { return testing::fps_envelope_at(pts, 500.0, x); }, 500.0, samples);
    const double k_ref = testing::midpoint_auc(
        [&](double x) { return testing::splat_envelope_at(pts, 5e6, x); }, 5e6, samples);
    const double bound = 100.0 * static_cast<double>(pts.size() + 1) / samples;
    CHECK(std::abs(auc_fps(pts, 500.0) - fps_ref) <= bound);
    CHECK(std::abs(auc_splats(pts, 5e6) - k_ref) <= bound);
  }
}

TEST_CASE("dominating point sets never lower the area") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_points(rng, 1e-3, 3.0, 1000000);
    const double before_fps = auc_fps(pts, 500.0);
    const double before_k = auc_splats(pts, 5e6);
    auto better = pts;
    better.push_back(fps_point(rng.uniform(), rng.uniform(1.0, 600.0), 1 + rng.below(5000000)));
    CHECK(auc_fps(better, 500.0) >= before_fps);
    for (auto& p : pts) p.quality = std::min(1.0, p.quality + 0.1);
    CHECK(auc_splats(pts, 5e6) >= before_k);
  }
}

TEST_CASE("points csv round trips and reports parse errors") {
  std::vector<OperatingPoint> pts{fps_point(0.8, 250, 10), fps_point(0.3, 900, 5)};
  pts[0].ratio = 1.0;
  pts[0].psnr = 27.5;
  pts[0].ssim = 0.8;
  std::stringstream ss;
  write_points_csv(ss, pts);
  CHECK(ss.str().substr(0, ss.str().find('\n')) == "ratio,k,psnr,ssim,quality,median_ms,fps");
  const auto back = read_points_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].k == 10);
  CHECK(back[0].psnr == 27.5);
  CHECK(back[1].fps == 900.0);
  CHECK_FALSE(back[0].lpips.has_value());

  pts[1].lpips = 0.2;
  std::stringstream with_lpips;
  write_points_csv(with_lpips, pts);
  const auto l = read_points_csv(with_lpips);
  CHECK_FALSE(l[0].lpips.has_value());
  CHECK(l[1].lpips == 0.2);

  std::istringstream minimal("k,quality,fps\n100,0.8,250\n");
  CHECK(auc_fps(read_points_csv(minimal), 500) == 40.0);

  std::istringstream empty("");
  CHECK(read_points_csv(empty).empty());
  std::istringstream header_only("k,quality,fps\n");
  CHECK(read_points_csv(header_only).empty());

  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_points_csv(in);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("k,quality,fps\n1,0.5,10\n2,abc,10\n").find("line 3, column 2") != std::string::npos);
  CHECK(message("k,quality,fps\n1,0.5\n").find("line 2") != std::string::npos);
  CHECK(message("k,quality\n1,0.5\n").find("fps") != std::string::npos);
  CHECK(message("k,quality,fps,bogus\n").find("column 4") != std::string::npos);
  CHECK(message("k,quality,fps\n1.5,0.5,10\n").find("column 1") != std::string::npos);
}

TEST_CASE("auc report serializes envelopes") {
  const std::vector<OperatingPoint> pts{fps_point(0.8, 250, 100)};
  const AucReport r = make_auc_report(pts, 500, 1000);
  CHECK(r.auc_fps == 40.0);
  CHECK(r.auc_splats == doctest::Approx(76.0));
  std::stringstream ss;
  write_auc_report(ss, r);
  const auto j = nlohmann::json::parse(ss.str());
  CHECK(j["auc_fps"].get<double>() == 40.0);
  CHECK(j["points"].get<int>() == 1);
  CHECK(j["envelope_fps"].size() == 2);
}
