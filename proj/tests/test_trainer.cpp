// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include <doctest.h>

#include "mgs/errors.hpp"
#include "mgs/grad.hpp"
#include "mgs/loss.hpp"
#include "mgs/optim.hpp"
#include "mgs/ordering.hpp"
#include "mgs/parallel.hpp"
#include "mgs/render.hpp"
#include "mgs/rng.hpp"
#include "mgs/trainer.hpp"
#include "support.hpp"

using namespace mgs;

namespace {

// Kolmogorov-Smirnov distance of samples against Uniform(lo, hi).
double ks_uniform(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = std::clamp((xs[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

struct Fixture {
  Image target;
  SplatModel model;
  AdamState state;
};

Fixture small_fixture(std::uint64_t seed, std::size_t n = 40) {
  Rng rng(seed);
  Fixture f;
  f.target = testing::random_image(rng, 24, 20);
  InitConfig init;
  init.num_splats = n;
  init.width = 24;
  init.height = 20;
  f.model = init_model(init, rng, &f.target);
  f.state = AdamState(n);
  return f;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.iterations = 30;
  return cfg;
}

}  // namespace

TEST_CASE("budget from ratio uses the ceiling") {
  CHECK(budget_from_ratio(0.305, 100) == 31);
  CHECK(budget_from_ratio(1.0, 100) == 100);
  CHECK(budget_from_ratio(0.7, 1000) == 700);
  CHECK(budget_from_ratio(0.001, 100) == 1);
  CHECK_THROWS_AS(budget_from_ratio(0.0, 100), Error);
  CHECK_THROWS_AS(budget_from_ratio(1.5, 100), Error);
}

TEST_CASE("sampled budgets are uniform over the keep-ratio range") {
  Rng rng(2718);
  const std::size_t n = 1000000;
  std::vector<double> ratios;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t k = sample_budget(rng, 0.05, n);
    REQUIRE(k >= 50000);
    REQUIRE(k <= n);
    ratios.push_back(static_cast<double>(k) / n);
  }
  const double d = ks_uniform(ratios, 0.05, 1.0);
  MESSAGE("KS distance " << d);
  CHECK(d < 0.01);
}

TEST_CASE("r_min of one always trains the full set") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(sample_budget(rng, 1.0, 2000) == 2000);
  CHECK_THROWS_AS(sample_budget(rng, 0.0, 10), Error);
}

TEST_CASE("budget modes") {
  Rng rng(3);
  TrainConfig cfg;
  cfg.budget_mode = BudgetMode::kMrlGrid;
  const std::size_t expected[] = {125, 250, 500, 1000, 125, 250, 500, 1000};
  for (int step = 1; step <= 8; ++step) CHECK(choose_budget(cfg, rng, 1000, step) == expected[step - 1]);
  cfg.budget_mode = BudgetMode::kFullOnly;
  for (int step = 1; step <= 4; ++step) CHECK(choose_budget(cfg, rng, 1000, step) == 1000);
}

TEST_CASE("first adam step moves by the learning rate against the gradient") {
  std::vector<Splat> params(2);
  GradientBuffer g(2);
  g.rows[0].mu = {0.3, -2.0};
  g.rows[0].opacity_raw = 1e-3;
  g.rows[1].color_raw = {5.0, 0.0, -1e-2};
  AdamState state(2);
  LearningRates lr;
  adam_update(params, g, state, lr);
  CHECK(state.step == 1);
  const auto expect = [](double grad, double rate) { return -rate * grad / (std::abs(grad) + 1e-8); };
  CHECK(params[0].mu[0] == doctest::Approx(expect(0.3, lr.mu)).epsilon(1e-12));
  CHECK(params[0].mu[1] == doctest::Approx(expect(-2.0, lr.mu)).epsilon(1e-12));
  CHECK(params[0].opacity_raw == doctest::Approx(expect(1e-3, lr.opacity_raw)).epsilon(1e-9));
  CHECK(params[1].color_raw[0] == doctest::Approx(expect(5.0, lr.color_raw)).epsilon(1e-12));
  CHECK(params[1].color_raw[1] == 0.0);
  CHECK(params[1].theta == 0.0);
}

TEST_CASE("zero gradients leave fresh parameters and decay moments") {
  std::vector<Splat> params(1);
  params[0].mu = {3.0, 4.0};
  const std::vector<Splat> before = params;
  AdamState state(1);
  adam_update(params, GradientBuffer(1), state, {});
  CHECK(params == before);

  GradientBuffer g(1);
  g.rows[0].theta = 1.0;
  adam_update(params, g, state, {});
  const double m1 = state.m[0].theta;
  const double v1 = state.v[0].theta;
  std::vector<Splat> frozen = params;
  LearningRates zero{0, 0, 0, 0, 0};
  adam_update(frozen, GradientBuffer(1), state, zero);
  CHECK(state.m[0].theta == doctest::Approx(0.9 * m1));
  CHECK(state.v[0].theta == doctest::Approx(0.999 * v1));
  CHECK(frozen == params);
}

TEST_CASE("adam rejects non-finite gradients") {
  std::vector<Splat> params(1);
  GradientBuffer g(1);
  g.rows[0].mu[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState state(1);
  CHECK_THROWS_AS(adam_update(params, g, state, {}), TrainingDiverged);
}

TEST_CASE("each step renders twice and runs two backward passes") {
  Fixture f = small_fixture(5);
  TrainConfig cfg = small_config();
  cfg.relocation.enabled = true;
  cfg.relocation.interval = 2;
  cfg.relocation.opacity_threshold = 0.6;
  Rng rng(5);
  for (int step = 1; step <= 4; ++step) {
    reset_render_counters();
    (void)train_step(f.model, f.state, f.target, cfg, rng, step);
    CHECK(render_counters().renders == 2);
    CHECK(render_counters().backwards == 2);
  }
}

TEST_CASE("a step with zero learning rates changes nothing but logs the loss") {
  Fixture f = small_fixture(6, 1);
  TrainConfig cfg = small_config();
  cfg.lr = {0, 0, 0, 0, 0};
  const SplatModel before = f.model;
  Rng rng(1);
  const TrainRecord r = train_step(f.model, f.state, f.target, cfg, rng, 1);
  CHECK(f.model == before);
  CHECK(r.k == 1);
  CHECK(r.full_loss > 0.0);
  CHECK(r.prefix_loss == r.full_loss);
}

TEST_CASE("full-only mode trains a single full-set objective") {
  Fixture f = small_fixture(7);
  TrainConfig cfg = small_config();
  cfg.budget_mode = BudgetMode::kFullOnly;
  Rng rng(1);
  const Image full = render(f.model, f.model.size());
  const TrainRecord r = train_step(f.model, f.state, f.target, cfg, rng, 1);
  CHECK(r.k == f.model.size());
  CHECK(r.prefix_loss == recon_loss(full, f.target).value);
}

TEST_CASE("identical prefix and full renders double the gradient") {
  Fixture f = small_fixture(8);
  const Image img = render(f.model, f.model.size());
  const MgsLossValue l = mgs_loss(img, img, f.target);
  GradientBuffer two = backward(f.model, f.model.size(), {}, l.grad_prefix);
  two += backward(f.model, f.model.size(), {}, l.grad_full);
  GradientBuffer one = backward(f.model, f.model.size(), {}, recon_loss(img, f.target).grad);
  for (auto& row : one.rows) row *= 2.0;
  CHECK(two == one);
}

TEST_CASE("training keeps the ordering invariant and tunes the loss down") {
  Fixture f = small_fixture(9);
  TrainConfig cfg = small_config();
  Rng rng(9);
  double first = 0.0, last = 0.0;
  for (int step = 1; step <= 40; ++step) {
    const TrainRecord r = train_step(f.model, f.state, f.target, cfg, rng, step);
    if (step == 1) first = r.full_loss;
    last = r.full_loss;
    const auto keys = rank_keys(f.model, cfg.ordering);
    for (std::size_t i = 1; i < keys.size(); ++i) REQUIRE(keys[i - 1] >= keys[i]);
  }
  CHECK(last < first);
}

TEST_CASE("non-finite targets surface as divergence with the step") {
  Fixture f = small_fixture(10);
  f.target.at(3, 3, 1) = std::numeric_limits<double>::quiet_NaN();
  Rng rng(1);
  try {
    (void)train_step(f.model, f.state, f.target, small_config(), rng, 17);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.step() == 17);
  }
}

TEST_CASE("relocation leaves healthy models alone") {
  Fixture f = small_fixture(11);
  const SplatModel before = f.model;
  Rng rng(1);
  RelocationConfig cfg;
  cfg.enabled = true;
  CHECK(maintain_capacity(f.model, f.state, f.target, rng, cfg, {}) == 0);
  CHECK(f.model == before);
}

TEST_CASE("relocation revives every dead splat") {
  Fixture f = small_fixture(12);
  for (auto& s : f.model.splats) s.opacity_raw = logit(1e-6);
  for (auto& m : f.state.m) m.theta = 1.0;
  Rng rng(1);
  RelocationConfig cfg;
  cfg.enabled = true;
  CHECK(maintain_capacity(f.model, f.state, f.target, rng, cfg, {}) == f.model.size());
  for (std::size_t i = 0; i < f.model.size(); ++i) {
    CHECK(f.model.splats[i].opacity() == 0.5);
    CHECK(f.state.m[i] == SplatGrad{});
    CHECK(f.model.splats[i].id == i);
  }
}

TEST_CASE("relocation falls back to uniform positions without residual") {
  const std::uint32_t w = 32, h = 32;
  SplatModel m;
  m.width = w;
  m.height = h;
  m.background = {0.5f, 0.5f, 0.5f};
  for (std::size_t i = 0; i < 4000; ++i) {
    Splat s;
    s.id = i;
    s.opacity_raw = logit(1e-6);
    m.splats.push_back(s);
  }
  const Image target(w, h, 0.5);
  AdamState state(m.size());
  Rng rng(4);
  RelocationConfig cfg;
  cfg.enabled = true;
  const Image perfect(w, h, 0.5);
  CHECK(maintain_capacity(m, state, target, rng, cfg, {}, &perfect) == m.size());
  int quadrant[4] = {0, 0, 0, 0};
  std::vector<double> xs;
  for (const auto& s : m.splats) {
    REQUIRE(s.mu[0] >= 0.0);
    REQUIRE(s.mu[0] < w);
    REQUIRE(s.mu[1] >= 0.0);
    REQUIRE(s.mu[1] < h);
    quadrant[(s.mu[0] >= w / 2.0) + 2 * (s.mu[1] >= h / 2.0)]++;
    xs.push_back(s.mu[0]);
  }
  for (int q : quadrant) CHECK(std::abs(q - 1000) < 150);
  CHECK(ks_uniform(xs, 0.0, w) < 0.04);
}

TEST_CASE("relocation follows the error map") {
  const std::uint32_t w = 16, h = 16;
  SplatModel m;
  m.width = w;
  m.height = h;
  for (std::size_t i = 0; i < 200; ++i) {
    Splat s;
    s.id = i;
    s.opacity_raw = logit(1e-6);
    m.splats.push_back(s);
  }
  Image target(w, h, 0.0);
  for (std::uint32_t y = 0; y < h; ++y) target.at(3, y, 0) = 1.0;
  AdamState state(m.size());
  Rng rng(4);
  RelocationConfig cfg;
  cfg.enabled = true;
  const Image blank(w, h, 0.0);
  maintain_capacity(m, state, target, rng, cfg, {}, &blank);
  for (const auto& s : m.splats) CHECK(std::floor(s.mu[0]) == 3.0);
}

TEST_CASE("fit with zero iterations returns the initialized model in order") {
  Rng rng(13);
  const Image target = testing::random_image(rng, 24, 20);
  InitConfig init;
  init.num_splats = 30;
  TrainConfig cfg;
  cfg.iterations = 0;
  cfg.seed = 44;
  const FitResult r = fit(target, init, cfg);
  Rng same(44);
  SplatModel expected = init_model(init, same, &target);
  reorder(expected, cfg.ordering);
  CHECK(r.model == expected);
  CHECK(r.log.records.empty());
}

TEST_CASE("fit is deterministic across runs and worker counts") {
  Rng rng(14);
  const Image target = testing::random_image(rng, 40, 36);
  InitConfig init;
  init.num_splats = 120;
  TrainConfig cfg;
  cfg.iterations = 25;
  cfg.seed = 3;
  cfg.relocation.enabled = true;
  cfg.relocation.interval = 10;
  cfg.relocation.opacity_threshold = 0.3;
  const FitResult a = fit(target, init, cfg);
  const FitResult b = fit(target, init, cfg);
  CHECK(a.model == b.model);
  CHECK(a.optimizer == b.optimizer);
  ScopedWorkerCount three(3);
  const FitResult c = fit(target, init, cfg);
  CHECK(c.model == a.model);
  const auto keys = rank_keys(a.model, cfg.ordering);
  for (std::size_t i = 1; i < keys.size(); ++i) CHECK(keys[i - 1] >= keys[i]);
}

TEST_CASE("fit reports checkpoints and records") {
  Rng rng(15);
  const Image target = testing::random_image(rng, 24, 20);
  InitConfig init;
  init.num_splats = 20;
  TrainConfig cfg;
  cfg.iterations = 10;
  cfg.log_interval = 3;
  FitCallbacks cb;
  cb.checkpoint_interval = 4;
  std::vector<std::int64_t> steps;
  cb.on_checkpoint = [&](std::int64_t s, const SplatModel&, const AdamState&) { steps.push_back(s); };
  const FitResult r = fit(target, init, cfg, cb);
  CHECK(steps == std::vector<std::int64_t>{4, 8});
  std::vector<std::int64_t> logged;
  for (const auto& rec : r.log.records) logged.push_back(rec.iteration);
  CHECK(logged == std::vector<std::int64_t>{3, 6, 9, 10});
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.r_min = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.iterations = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.lr.mu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
