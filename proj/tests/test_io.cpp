// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "mgs/checkpoint.hpp"
#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/png_io.hpp"
#include "mgs/rng.hpp"
#include "support.hpp"

using namespace mgs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mgs_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

template <typename T>
void put(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

// Byte layout written out field by field.
std::string encode(const SplatModel& m) {
  std::string out = "MGS1";
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, m.width);
  put<std::uint32_t>(out, m.height);
  put<std::uint64_t>(out, m.size());
  for (float b : m.background) put<float>(out, b);
  put<std::uint8_t>(out, m.criterion.tag());
  for (const auto& s : m.splats) {
    put<std::uint64_t>(out, s.id);
    put<double>(out, s.mu[0]);
    put<double>(out, s.mu[1]);
    put<double>(out, s.log_scale[0]);
    put<double>(out, s.log_scale[1]);
    put<double>(out, s.theta);
    put<double>(out, s.opacity_raw);
    for (double c : s.color_raw) put<double>(out, c);
    put<double>(out, s.depth);
  }
  return out;
}

SplatModel sample_model(std::size_t n = 25) {
  Rng rng(42);
  testing::SceneSpec spec;
  spec.splats = n;
  SplatModel m = testing::random_scene(rng, spec);
  m.criterion = {ScoreKind::kColorEnergy, SortDirection::kAscending};
  return m;
}

}  // namespace

TEST_CASE("checkpoint bytes follow the documented layout") {
  const SplatModel m = sample_model();
  std::ostringstream out;
  write_checkpoint(out, m);
  const std::string bytes = out.str();
  CHECK(bytes.size() == kCheckpointHeaderBytes + m.size() * kCheckpointRecordBytes);
  CHECK(bytes == encode(m));
}

TEST_CASE("checkpoints round trip exactly") {
  SplatModel m = sample_model();
  m.background = {0.1f, 0.7f, 1.0f};
  std::stringstream ss;
  write_checkpoint(ss, m);
  CHECK(read_checkpoint(ss) == m);
  const fs::path p = scratch("round.mgs");
  write_checkpoint(p, m);
  CHECK(read_checkpoint(p) == m);
  SplatModel empty = m;
  empty.splats.clear();
  std::stringstream se;
  write_checkpoint(se, empty);
  CHECK(read_checkpoint(se) == empty);
}

TEST_CASE("malformed checkpoints are rejected") {
  const std::string good = encode(sample_model(3));
  auto parse = [](const std::string& bytes) {
    std::istringstream in(bytes);
    return read_checkpoint(in);
  };
  CHECK_NOTHROW(parse(good));
  std::string magic = good;
  magic[0] = 'X';
  CHECK_THROWS_AS(parse(magic), Error);
  std::string version = good;
  version[4] = 9;
  CHECK_THROWS_AS(parse(version), Error);
  CHECK_THROWS_AS(parse(good.substr(0, good.size() - 1)), Error);
  CHECK_THROWS_AS(parse(good.substr(0, 10)), Error);
  std::string tag = good;
  tag[kCheckpointHeaderBytes - 1] = 99;
  CHECK_THROWS_AS(parse(tag), Error);
  SplatModel dup = sample_model(3);
  dup.splats[1].id = dup.splats[0].id;
  CHECK_THROWS_AS(parse(encode(dup)), Error);
  CHECK_THROWS_AS(read_checkpoint(scratch("does_not_exist.mgs")), Error);
}

TEST_CASE("png round trip quantizes to 8 bits") {
  Rng rng(3);
  const Image img = testing::random_image(rng, 13, 7);
  const fs::path p = scratch("img.png");
  write_png(p, img);
  const Image back = read_png(p);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.value_count(); ++i) {
    CHECK(back.data()[i] == quantize_channel(img.data()[i]) / 255.0);
  }
  write_png(p, back);
  CHECK(read_png(p) == back);
  CHECK(quantize_channel(-1.0) == 0);
  CHECK(quantize_channel(2.0) == 255);
  CHECK(quantize_channel(0.5) == 128);
  CHECK_THROWS_AS(read_png(scratch("missing.png")), Error);
}

TEST_CASE("run config defaults and strict keys") {
  const RunConfig def = run_config_from_json(json::object());
  CHECK(def == RunConfig{});
  CHECK(def.train.iterations == 5000);
  CHECK(def.eval.clip_fps == 500.0);
  CHECK(def.eval.ratios.size() == 12);

  auto error_of = [](const json& j) {
    try {
      run_config_from_json(j);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidConfig);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of({{"bogus", 1}}).find("bogus") != std::string::npos);
  CHECK(error_of({{"train", {{"lr", {{"mu", 1e-3}, {"muu", 1}}}}}}).find("train.lr.muu") != std::string::npos);
  CHECK(error_of({{"train", {{"iterations", "many"}}}}).find("train.iterations") != std::string::npos);
  CHECK(error_of({{"train", {{"r_min", 0.0}}}}).find("r_min") != std::string::npos);
  CHECK(error_of({{"train", {{"ordering", {{"kind", "size"}}}}}}).find("size") != std::string::npos);
  CHECK(error_of({{"ablate", {{"variants", {"opacity_desc", "nonsense"}}}}}).find("nonsense") != std::string::npos);
  CHECK(error_of({{"init", {{"num_splats", -3}}}}).find("init.num_splats") != std::string::npos);
}

TEST_CASE("run config sections map onto library configs") {
  const json j = {
      {"seed", 17},
      {"init", {{"num_splats", 300}, {"initial_scale", 1.5}, {"background", {0.1, 0.2, 0.3}}}},
      {"train",
       {{"iterations", 12},
        {"budget_mode", "mrl_grid"},
        {"ordering", {{"kind", "area"}, {"direction", "asc"}}},
        {"relocation", {{"enabled", true}, {"interval", 5}}}}},
      {"loss", {{"lambda", 0.5}, {"gamma", 2.0}}},
      {"render", {{"tile_size", 8}}},
      {"eval", {{"ratios", {1.0, 0.5}}, {"clip_splats", 2000}}},
  };
  const RunConfig c = run_config_from_json(j);
  CHECK(c.seed == 17);
  CHECK(c.train.seed == 17);
  CHECK(c.init.num_splats == 300);
  CHECK(c.init.background[2] == 0.3f);
  CHECK(c.train.iterations == 12);
  CHECK(c.train.budget_mode == BudgetMode::kMrlGrid);
  CHECK(c.train.ordering == OrderingCriterion{ScoreKind::kArea, SortDirection::kAscending});
  CHECK(c.train.relocation.enabled);
  CHECK(c.train.relocation.reset_scale == 1.5);
  CHECK(c.train.loss.lambda == 0.5);
  CHECK(c.train.loss.gamma == 2.0);
  CHECK(c.train.render.tile_size == 8);
  CHECK(c.eval.ratios == std::vector<double>{1.0, 0.5});
  CHECK(c.eval.clip_splats == 2000.0);
}

TEST_CASE("echoed config reproduces the run config") {
  RunConfig c;
  c.seed = 5;
  c.train.seed = 5;
  c.output_dir = "elsewhere";
  c.init.num_splats = 77;
  c.train.r_min = 0.3;
  c.train.lr.theta = 0.0;
  c.train.ordering = {ScoreKind::kFixedPrepend, SortDirection::kDescending};
  c.eval.repeats = 2;
  c.ablate_variants = {"opacity_desc", "full_only"};
  CHECK(run_config_from_json(to_json(c)) == c);
  CHECK(run_config_from_json(json::parse(to_json(c).dump())) == c);
  const fs::path p = scratch("config.json");
  save_run_config(p, c);
  CHECK(load_run_config(p) == c);
}

TEST_CASE("ablation variants") {
  TrainConfig base;
  TrainConfig t = base;
  apply_variant("opacity_asc", t);
  CHECK(t.ordering == OrderingCriterion{ScoreKind::kOpacity, SortDirection::kAscending});
  t = base;
  apply_variant("fixed_append", t);
  CHECK(t.ordering.kind == ScoreKind::kFixedAppend);
  t = base;
  apply_variant("color_variance_desc+prefix_only", t);
  CHECK(t.ordering.kind == ScoreKind::kColorVariance);
  CHECK(t.loss.gamma == 0.0);
  t = base;
  apply_variant("mrl", t);
  CHECK(t.budget_mode == BudgetMode::kMrlGrid);
  t = base;
  apply_variant("full_only", t);
  CHECK(t.budget_mode == BudgetMode::kFullOnly);
  t = base;
  apply_variant("ratio=4:1", t);
  CHECK(t.loss.gamma == 0.25);
  t = base;
  apply_variant("gamma=3", t);
  CHECK(t.loss.gamma == 3.0);
  for (const char* bad : {"", "opacity", "fixed_append_desc", "gamma=x", "ratio=1", "volume_desc", "mrl+"}) {
    TrainConfig b = base;
    CHECK_THROWS_AS(apply_variant(bad, b), Error);
  }
}

TEST_CASE("optimizer sidecar round trips") {
  AdamState s(4);
  s.step = 12;
  s.m[1].mu = {0.25, -1e-7};
  s.v[3].color_raw = {1e-12, 2.0, 3.5};
  const fs::path p = scratch("opt.json");
  write_optimizer_sidecar(p, s, RunConfig{});
  CHECK(read_optimizer_sidecar(p) == s);
  const json j = json::parse(std::ifstream(p));
  CHECK(j.contains("config"));
}
