// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mgs/errors.hpp"

namespace mgs {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorCode::kInvalidConfig, where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0) {
            throw std::invalid_argument("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
      }
      out = it->get<T>();
    } catch (const std::exception& e) {
      fail(ErrorCode::kInvalidConfig, where(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? "config" : path_;
    if (key) p += std::string(path_.empty() ? "" : ".") + key;
    return p;
  }

  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(ErrorCode::kInvalidConfig, "unknown key " + where(it.key().c_str()));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void with_section(Section& parent, const char* key, F&& fn) {
  if (const json* child = parent.child(key)) {
    Section s(*child, parent.child_path(key));
    fn(s);
    s.finish();
  }
}

std::vector<double> read_double_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::kInvalidConfig, where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kInvalidConfig, where + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (init.num_splats == 0) fail(ErrorCode::kInvalidConfig, "init.num_splats must be >= 1");
  if (!(init.initial_scale > 0.0)) fail(ErrorCode::kInvalidConfig, "init.initial_scale must be positive");
  for (float b : init.background) {
    if (!(b >= 0.0f && b <= 1.0f)) fail(ErrorCode::kInvalidConfig, "init.background must lie in [0, 1]");
  }
  if (checkpoint_interval < 0) fail(ErrorCode::kInvalidConfig, "checkpoint_interval must be >= 0");
  train.validate();
  if (eval.ratios.empty()) fail(ErrorCode::kInvalidConfig, "eval.ratios must not be empty");
  for (double r : eval.ratios) {
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorCode::kInvalidConfig, "eval.ratios must lie in (0, 1]");
  }
  if (!(eval.clip_fps > 0.0) || !(eval.clip_splats > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "eval clip values must be positive");
  }
  if (eval.repeats < 1) fail(ErrorCode::kInvalidConfig, "eval.repeats must be >= 1");
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  Section root(j, "");
  root.read("seed", cfg.seed);
  root.read("output_dir", cfg.output_dir);
  root.read("checkpoint_interval", cfg.checkpoint_interval);

  with_section(root, "init", [&](Section& s) {
    s.read("num_splats", cfg.init.num_splats);
    s.read("initial_scale", cfg.init.initial_scale);
    s.read("color_clamp", cfg.init.color_clamp);
    if (const json* bg = s.child("background")) {
      const auto v = read_double_list(*bg, s.child_path("background"));
      if (v.size() != 3) fail(ErrorCode::kInvalidConfig, s.child_path("background") + " needs 3 values");
      for (std::size_t c = 0; c < 3; ++c) cfg.init.background[c] = static_cast<float>(v[c]);
    }
  });

  bool reset_scale_given = false;
  bool color_clamp_given = false;
  with_section(root, "train", [&](Section& s) {
    TrainConfig& t = cfg.train;
    s.read("iterations", t.iterations);
    s.read("r_min", t.r_min);
    s.read("reorder_interval", t.reorder_interval);
    s.read("log_interval", t.log_interval);
    std::string mode(to_string(t.budget_mode));
    s.read("budget_mode", mode);
    const auto parsed_mode = parse_budget_mode(mode);
    if (!parsed_mode) fail(ErrorCode::kInvalidConfig, s.where("budget_mode") + ": unknown mode '" + mode + "'");
    t.budget_mode = *parsed_mode;
    if (const json* r = s.child("mrl_ratios")) t.mrl_ratios = read_double_list(*r, s.child_path("mrl_ratios"));
    with_section(s, "ordering", [&](Section& o) {
      std::string kind(to_string(t.ordering.kind));
      std::string dir(to_string(t.ordering.direction));
      o.read("kind", kind);
      o.read("direction", dir);
      const auto k = parse_score_kind(kind);
      const auto d = parse_direction(dir);
      if (!k) fail(ErrorCode::kInvalidConfig, o.where("kind") + ": unknown criterion '" + kind + "'");
      if (!d) fail(ErrorCode::kInvalidConfig, o.where("direction") + ": unknown direction '" + dir + "'");
      t.ordering = {*k, *d};
      if (t.ordering.is_fixed()) t.ordering.direction = SortDirection::kDescending;
    });
    with_section(s, "lr", [&](Section& l) {
      l.read("mu", t.lr.mu);
      l.read("log_scale", t.lr.log_scale);
      l.read("theta", t.lr.theta);
      l.read("opacity_raw", t.lr.opacity_raw);
      l.read("color_raw", t.lr.color_raw);
    });
    with_section(s, "adam", [&](Section& a) {
      a.read("beta1", t.adam.beta1);
      a.read("beta2", t.adam.beta2);
      a.read("eps", t.adam.eps);
    });
    with_section(s, "relocation", [&](Section& r) {
      r.read("enabled", t.relocation.enabled);
      r.read("opacity_threshold", t.relocation.opacity_threshold);
      r.read("interval", t.relocation.interval);
      reset_scale_given = r.has("reset_scale");
      color_clamp_given = r.has("color_clamp");
      r.read("reset_scale", t.relocation.reset_scale);
      r.read("color_clamp", t.relocation.color_clamp);
    });
  });
  if (!reset_scale_given) cfg.train.relocation.reset_scale = cfg.init.initial_scale;
  if (!color_clamp_given) cfg.train.relocation.color_clamp = cfg.init.color_clamp;

  with_section(root, "loss", [&](Section& s) {
    LossConfig& l = cfg.train.loss;
    s.read("lambda", l.lambda);
    s.read("gamma", l.gamma);
    s.read("ssim_window", l.ssim_window);
    s.read("ssim_sigma", l.ssim_sigma);
    s.read("ssim_k1", l.ssim_k1);
    s.read("ssim_k2", l.ssim_k2);
    s.read("l1_smooth_eps", l.l1_smooth_eps);
  });
  with_section(root, "render", [&](Section& s) {
    RenderSettings& r = cfg.train.render;
    s.read("tile_size", r.tile_size);
    s.read("alpha_min", r.alpha_min);
    s.read("alpha_max", r.alpha_max);
    s.read("radius_sigmas", r.radius_sigmas);
    s.read("transmittance_min", r.transmittance_min);
  });
  with_section(root, "eval", [&](Section& s) {
    if (const json* r = s.child("ratios")) cfg.eval.ratios = read_double_list(*r, s.child_path("ratios"));
    s.read("clip_fps", cfg.eval.clip_fps);
    s.read("clip_splats", cfg.eval.clip_splats);
    s.read("repeats", cfg.eval.repeats);
  });
  with_section(root, "ablate", [&](Section& s) {
    if (const json* v = s.child("variants")) {
      if (!v->is_array()) fail(ErrorCode::kInvalidConfig, "ablate.variants must be an array of strings");
      for (const auto& e : *v) {
        if (!e.is_string()) fail(ErrorCode::kInvalidConfig, "ablate.variants must be an array of strings");
        cfg.ablate_variants.push_back(e.get<std::string>());
      }
    }
  });
  root.finish();

  cfg.train.seed = cfg.seed;
  cfg.validate();
  for (const auto& v : cfg.ablate_variants) {
    TrainConfig probe = cfg.train;
    apply_variant(v, probe);
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["checkpoint_interval"] = cfg.checkpoint_interval;
  j["init"] = {{"num_splats", cfg.init.num_splats},
               {"initial_scale", cfg.init.initial_scale},
               {"color_clamp", cfg.init.color_clamp},
               {"background", {cfg.init.background[0], cfg.init.background[1], cfg.init.background[2]}}};
  j["train"] = {
      {"iterations", t.iterations},
      {"r_min", t.r_min},
      {"reorder_interval", t.reorder_interval},
      {"log_interval", t.log_interval},
      {"budget_mode", std::string(to_string(t.budget_mode))},
      {"mrl_ratios", t.mrl_ratios},
      {"ordering", {{"kind", std::string(to_string(t.ordering.kind))},
                    {"direction", std::string(to_string(t.ordering.direction))}}},
      {"lr", {{"mu", t.lr.mu},
              {"log_scale", t.lr.log_scale},
              {"theta", t.lr.theta},
              {"opacity_raw", t.lr.opacity_raw},
              {"color_raw", t.lr.color_raw}}},
      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}},
      {"relocation", {{"enabled", t.relocation.enabled},
                      {"opacity_threshold", t.relocation.opacity_threshold},
                      {"interval", t.relocation.interval},
                      {"reset_scale", t.relocation.reset_scale},
                      {"color_clamp", t.relocation.color_clamp}}},
  };
  j["loss"] = {{"lambda", t.loss.lambda},         {"gamma", t.loss.gamma},
               {"ssim_window", t.loss.ssim_window}, {"ssim_sigma", t.loss.ssim_sigma},
               {"ssim_k1", t.loss.ssim_k1},         {"ssim_k2", t.loss.ssim_k2},
               {"l1_smooth_eps", t.loss.l1_smooth_eps}};
  j["render"] = {{"tile_size", t.render.tile_size},
                 {"alpha_min", t.render.alpha_min},
                 {"alpha_max", t.render.alpha_max},
                 {"radius_sigmas", t.render.radius_sigmas},
                 {"transmittance_min", t.render.transmittance_min}};
  j["eval"] = {{"ratios", cfg.eval.ratios},
               {"clip_fps", cfg.eval.clip_fps},
               {"clip_splats", cfg.eval.clip_splats},
               {"repeats", cfg.eval.repeats}};
  j["ablate"] = {{"variants", cfg.ablate_variants}};
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, "config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << to_json(cfg).dump(2) << '\n';
}

void apply_variant(const std::string& variant, TrainConfig& cfg) {
  if (variant.empty()) fail(ErrorCode::kInvalidConfig, "empty ablation variant");
  if (variant.back() == '+') fail(ErrorCode::kInvalidConfig, "empty token in variant '" + variant + "'");
  std::stringstream ss(variant);
  std::string token;
  while (std::getline(ss, token, '+')) {
    if (token == "prefix_full") {
      cfg.budget_mode = BudgetMode::kStochastic;
    } else if (token == "prefix_only") {
      cfg.budget_mode = BudgetMode::kStochastic;
      cfg.loss.gamma = 0.0;
    } else if (token == "mrl") {
      cfg.budget_mode = BudgetMode::kMrlGrid;
    } else if (token == "full_only") {
      cfg.budget_mode = BudgetMode::kFullOnly;
    } else if (token.rfind("gamma=", 0) == 0) {
      try {
        std::size_t used = 0;
        const double g = std::stod(token.substr(6), &used);
        if (used != token.size() - 6 || !(g >= 0.0)) throw std::invalid_argument("bad gamma");
        cfg.loss.gamma = g;
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidConfig, "bad gamma in variant token '" + token + "'");
      }
    } else if (token.rfind("ratio=", 0) == 0) {
      const std::string body = token.substr(6);
      const auto colon = body.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
        const double a = std::stod(body.substr(0, colon));
        const double b = std::stod(body.substr(colon + 1));
        if (!(a > 0.0 && b >= 0.0)) throw std::invalid_argument("weights");
        cfg.loss.gamma = b / a;
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidConfig, "bad weight ratio in variant token '" + token + "'");
      }
    } else {
      OrderingCriterion c;
      std::string kind = token;
      if (token.size() > 5 && token.ends_with("_desc")) {
        kind = token.substr(0, token.size() - 5);
        c.direction = SortDirection::kDescending;
      } else if (token.size() > 4 && token.ends_with("_asc")) {
        kind = token.substr(0, token.size() - 4);
        c.direction = SortDirection::kAscending;
      }
      const auto k = parse_score_kind(kind);
      const bool fixed = k && (*k == ScoreKind::kFixedAppend || *k == ScoreKind::kFixedPrepend);
      if (!k || (fixed && kind != token) || (!fixed && kind == token)) {
        fail(ErrorCode::kInvalidConfig, "unknown ablation variant token '" + token + "'");
      }
      c.kind = *k;
      if (fixed) c.direction = SortDirection::kDescending;
      cfg.ordering = c;
    }
  }
}

void write_optimizer_sidecar(const std::filesystem::path& path, const AdamState& state,
                             const RunConfig& cfg) {
  auto rows = [](const std::vector<SplatGrad>& v) {
    json arr = json::array();
    for (const auto& g : v) {
      json row = json::array();
      for (Param p : kAllParams) row.push_back(grad_value(g, p));
      arr.push_back(std::move(row));
    }
    return arr;
  };
  json j;
  j["format"] = "mgs-optimizer";
  j["version"] = 1;
  j["step"] = state.step;
  j["params"] = json::array();
  for (Param p : kAllParams) j["params"].push_back(to_string(p));
  j["m"] = rows(state.m);
  j["v"] = rows(state.v);
  j["config"] = to_json(cfg);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
}

AdamState read_optimizer_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("format") != "mgs-optimizer") fail(ErrorCode::kParse, "not an optimizer sidecar");
    const auto& m = j.at("m");
    const auto& v = j.at("v");
    if (m.size() != v.size()) fail(ErrorCode::kParse, "moment arrays differ in length");
    AdamState state(m.size());
    state.step = j.at("step").get<std::uint64_t>();
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t p = 0; p < std::size(kAllParams); ++p) {
        grad_ref(state.m[i], kAllParams[p]) = m[i].at(p).get<double>();
        grad_ref(state.v[i], kAllParams[p]) = v[i].at(p).get<double>();
      }
    }
    return state;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, "optimizer sidecar " + path.string() + ": " + e.what());
  }
}

}  // namespace mgs
