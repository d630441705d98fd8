// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mirrorfield {

namespace {

using nlohmann::json;

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Pulls a key, tracking consumption so leftovers can be reported.
struct Reader {
  const json& obj;
  std::set<std::string> seen;

  explicit Reader(const json& o) : obj(o) {
    if (!o.is_object()) throw ConfigError("expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
      seen.insert(key);
      try {
        out = it->get<T>();
      } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
      }
    }
  }

  void get(const char* key, Vec3& out) {
    if (auto it = obj.find(key); it != obj.end()) {
      seen.insert(key);
      out = vec_from_json(*it);
    }
  }

  void finish(const char* section) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!seen.count(it.key()))
        throw ConfigError(std::string("unknown key '") + it.key() + "' in " + section);
    }
  }
};

}  // namespace

std::string config_to_json(const TrainConfig& c) {
  json j;
  j["field"] = {{"resolution", c.resolution},
                {"sh_degree", c.sh_degree},
                {"bbox_min", vec_to_json(c.bbox_min)},
                {"bbox_max", vec_to_json(c.bbox_max)}};
  j["render"] = {{"n_samples", c.n_samples}, {"max_depth", c.max_depth},
                 {"t_min", c.t_min},         {"t_max", c.t_max},
                 {"tau", c.tau},             {"epsilon", c.epsilon},
                 {"term_eps", c.term_eps},   {"skip_eps", c.skip_eps}};
  j["losses"] = {{"lambda_c", c.weights.lambda_c},
                 {"lambda_m", c.weights.lambda_m},
                 {"lambda_pc", c.weights.lambda_pc},
                 {"lambda_n", c.weights.lambda_n},
                 {"lambda_nreg", c.weights.lambda_nreg},
                 {"bce_clamp", c.bce_clamp},
                 {"nreg_on_analytic", c.nreg_on_analytic},
                 {"nreg_weight_gate", c.nreg_weight_gate},
                 {"nsup_weight_gate", c.nsup_weight_gate},
                 {"quad_opacity_floor", c.quad_opacity_floor},
                 {"quads_per_step", c.quads_per_step}};
  j["schedule"] = {{"stage1_frac", c.stage1_frac},
                   {"stage2_frac", c.stage2_frac},
                   {"k_color", vec_to_json(c.k_color)},
                   {"stage_masked", c.stage_masked},
                   {"stage_max_depth", c.stage_max_depth}};
  j["optim"] = {{"lr", c.lr},
                {"lr_density_mult", c.lr_density_mult},
                {"lr_sh_mult", c.lr_sh_mult},
                {"lr_normal_mult", c.lr_normal_mult},
                {"lr_reflprob_mult", c.lr_reflprob_mult},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"cosine_decay", c.cosine_decay},
                {"lr_final_frac", c.lr_final_frac}};
  j["train"] = {{"steps", c.steps},
                {"batch_rays", c.batch_rays},
                {"seed", c.seed},
                {"log_every", c.log_every},
                {"checkpoint_every", c.checkpoint_every}};
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  TrainConfig c;
  std::set<std::string> sections;
  for (auto it = j.begin(); it != j.end(); ++it) sections.insert(it.key());
  for (const auto& s : sections) {
    if (s != "field" && s != "render" && s != "losses" && s != "schedule" &&
        s != "optim" && s != "train")
      throw ConfigError("unknown config section '" + s + "'");
  }

  if (j.contains("field")) {
    Reader r(j["field"]);
    r.get("resolution", c.resolution);
    r.get("sh_degree", c.sh_degree);
    r.get("bbox_min", c.bbox_min);
    r.get("bbox_max", c.bbox_max);
    r.finish("field");
  }
  if (j.contains("render")) {
    Reader r(j["render"]);
    r.get("n_samples", c.n_samples);
    r.get("max_depth", c.max_depth);
    r.get("t_min", c.t_min);
    r.get("t_max", c.t_max);
    r.get("tau", c.tau);
    r.get("epsilon", c.epsilon);
    r.get("term_eps", c.term_eps);
    r.get("skip_eps", c.skip_eps);
    r.finish("render");
  }
  if (j.contains("losses")) {
    Reader r(j["losses"]);
    r.get("lambda_c", c.weights.lambda_c);
    r.get("lambda_m", c.weights.lambda_m);
    r.get("lambda_pc", c.weights.lambda_pc);
    r.get("lambda_n", c.weights.lambda_n);
    r.get("lambda_nreg", c.weights.lambda_nreg);
    r.get("bce_clamp", c.bce_clamp);
    r.get("nreg_on_analytic", c.nreg_on_analytic);
    r.get("nreg_weight_gate", c.nreg_weight_gate);
    r.get("nsup_weight_gate", c.nsup_weight_gate);
    r.get("quad_opacity_floor", c.quad_opacity_floor);
    r.get("quads_per_step", c.quads_per_step);
    r.finish("losses");
  }
  if (j.contains("schedule")) {
    Reader r(j["schedule"]);
    r.get("stage1_frac", c.stage1_frac);
    r.get("stage2_frac", c.stage2_frac);
    r.get("k_color", c.k_color);
    r.get("stage_masked", c.stage_masked);
    r.get("stage_max_depth", c.stage_max_depth);
    r.finish("schedule");
  }
  if (j.contains("optim")) {
    Reader r(j["optim"]);
    r.get("lr", c.lr);
    r.get("lr_density_mult", c.lr_density_mult);
    r.get("lr_sh_mult", c.lr_sh_mult);
    r.get("lr_normal_mult", c.lr_normal_mult);
    r.get("lr_reflprob_mult", c.lr_reflprob_mult);
    r.get("adam_beta1", c.adam_beta1);
    r.get("adam_beta2", c.adam_beta2);
    r.get("adam_eps", c.adam_eps);
    r.get("cosine_decay", c.cosine_decay);
    r.get("lr_final_frac", c.lr_final_frac);
    r.finish("optim");
  }
  if (j.contains("train")) {
    Reader r(j["train"]);
    r.get("steps", c.steps);
    r.get("batch_rays", c.batch_rays);
    r.get("seed", c.seed);
    r.get("log_every", c.log_every);
    r.get("checkpoint_every", c.checkpoint_every);
    r.finish("train");
  }

  if (c.resolution < 2) throw ConfigError("resolution must be at least 2");
  if (c.sh_degree < 0 || c.sh_degree > 2) throw ConfigError("sh_degree must be 0..2");
  if (!(c.bbox_min.x < c.bbox_max.x && c.bbox_min.y < c.bbox_max.y &&
        c.bbox_min.z < c.bbox_max.z))
    throw ConfigError("bbox_min must be below bbox_max");
  if (c.n_samples < 2) throw ConfigError("n_samples must be at least 2");
  if (c.max_depth < 0) throw ConfigError("max_depth must be nonnegative");
  if (!(c.t_min >= 0.0 && c.t_min < c.t_max)) throw ConfigError("bad t range");
  if (c.weights.lambda_c < 0 || c.weights.lambda_m < 0 || c.weights.lambda_pc < 0 ||
      c.weights.lambda_n < 0 || c.weights.lambda_nreg < 0)
    throw ConfigError("loss weights must be nonnegative");
  if (!(c.stage1_frac > 0.0 && c.stage1_frac <= c.stage2_frac && c.stage2_frac <= 1.0))
    throw ConfigError("stage fractions must satisfy 0 < s1 <= s2 <= 1");
  for (int a = 0; a < 3; ++a)
    if (c.k_color[a] < 0.0 || c.k_color[a] > 1.0)
      throw ConfigError("k_color channels must lie in [0,1]");
  if (c.steps < 0 || c.batch_rays < 1) throw ConfigError("bad run shape");
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const std::string& path, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << config_to_json(cfg) << "\n";
}

std::uint64_t config_hash(const TrainConfig& cfg) {
  const std::string dump = config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mirrorfield
