// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

struct LossWeights {
  double lambda_c = 1.0;
  double lambda_m = 0.1;
  double lambda_pc = 0.01;
  double lambda_n = 0.01;
  double lambda_nreg = 0.01;
};

// Everything a training run needs, serializable to JSON.  Unknown keys in a
// loaded file are rejected so typos fail loudly.
struct TrainConfig {
  // Field.
  int resolution = 64;
  int sh_degree = 2;
  Vec3 bbox_min{-1.05, -1.05, -1.05};
  Vec3 bbox_max{1.05, 1.05, 1.05};

  // Rendering during training and evaluation.
  int n_samples = 64;
  int max_depth = 2;
  double t_min = 0.02;
  double t_max = 4.0;
  double tau = 0.05;
  double epsilon = 0.0;  // 0 = 2x mean primary spacing
  double term_eps = 1e-12;
  double skip_eps = 1e-12;

  // Losses.
  LossWeights weights;
  double bce_clamp = 1e-6;
  bool nreg_on_analytic = false;  // apply the facing penalty to the analytic normal
  double nreg_weight_gate = 1e-3;
  double nsup_weight_gate = 1e-3;
  double quad_opacity_floor = 0.2;
  int quads_per_step = 8;

  // Progressive schedule.  stage_max_depth -1 means "use max_depth".
  double stage1_frac = 0.2;
  double stage2_frac = 0.6;
  Vec3 k_color{0, 0, 0};
  std::array<bool, 3> stage_masked{true, true, false};
  std::array<int, 3> stage_max_depth{0, 0, -1};

  // Optimizer.
  double lr = 1e-2;
  double lr_density_mult = 3.0;
  double lr_sh_mult = 1.0;
  double lr_normal_mult = 1.0;
  double lr_reflprob_mult = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  bool cosine_decay = true;
  double lr_final_frac = 0.1;

  // Run shape.
  int steps = 5000;
  int batch_rays = 1024;
  std::uint64_t seed = 1;
  int log_every = 10;
  int checkpoint_every = 0;  // 0 = final checkpoint only
};

std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& text);
TrainConfig load_config(const std::string& path);
void save_config(const std::string& path, const TrainConfig& cfg);

// FNV-1a over the canonical (sorted-key) JSON dump.
std::uint64_t config_hash(const TrainConfig& cfg);

}  // namespace mirrorfield
