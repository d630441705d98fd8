// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mirrorfield/config.hpp"
#include "mirrorfield/grad.hpp"
#include "mirrorfield/render.hpp"

namespace mirrorfield {

enum class PhotometricVariant { Masked, Full };

struct StageSpec {
  LossWeights weights;
  PhotometricVariant variant = PhotometricVariant::Masked;
  int max_depth = 0;
};

struct Schedule {
  int stage1_end = 0;
  int stage2_end = 0;
  std::array<StageSpec, 3> stages;
  Vec3 k_color{0, 0, 0};
};

Schedule make_schedule(const TrainConfig& cfg);

// Returns the stage spec for a step plus the stage index (0-based).
const StageSpec& schedule_at(const Schedule& s, int step, int* stage_index = nullptr);

struct TrainBatch {
  std::vector<Ray> rays;
  std::vector<Vec3> gt_color;
  std::vector<std::uint8_t> mask;  // 1 = camera ray hits the mirror
  int image_index = 0;
};

// Loss values (unweighted) plus their weighted total.
struct LossParts {
  double photometric = 0;
  double mask_bce = 0;
  double plane = 0;
  double normal_sup = 0;
  double normal_reg = 0;
};

double loss_photometric(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt);
double loss_masked_photometric(const std::vector<Vec3>& pred,
                               const std::vector<Vec3>& gt,
                               const std::vector<std::uint8_t>& mask, const Vec3& k);
double loss_mask_bce(const std::vector<double>& pred_m,
                     const std::vector<std::uint8_t>& gt_m, double clamp_eps);
double loss_plane_consistency(const std::vector<std::array<Vec3, 4>>& quads);
double loss_forward_normal(const std::vector<Vec3>& normals,
                           const std::vector<Vec3>& ray_dirs);
double loss_normal_supervision(const std::vector<Vec3>& smoothed,
                               const std::vector<Vec3>& analytic,
                               const std::vector<double>& weights);
double total_loss(const LossParts& parts, const LossWeights& w);

// Picks quads of surface points from distinct mirror-mask rays of one batch.
// Rays qualify when their rendered opacity reaches opacity_floor; fewer than
// four qualifying rays yields an empty list.
std::vector<std::array<Vec3, 4>> sample_plane_quads(const TrainBatch& batch,
                                                    const FieldParams& field,
                                                    Rng& rng, int n_quads,
                                                    const TrainConfig& cfg);

struct OptimState {
  std::vector<float> m_density, v_density;
  std::vector<float> m_sh, v_sh;
  std::vector<float> m_normal, v_normal;
  std::vector<float> m_reflprob, v_reflprob;
  std::int64_t step = 0;

  void resize_like(const FieldParams& p);
};

struct StepMetrics {
  LossParts parts;
  double total = 0;
  double lr = 0;
  int stage = 0;
  int spawned_rays = 0;
};

// Scratch shared across steps so buffers are allocated once.  After a step,
// worker_grads[0] holds the merged parameter gradient of the whole batch.
struct TrainWorkspace {
  std::vector<RayRec> records;
  std::vector<RayCotangent> cotangents;
  std::vector<std::vector<SampleCot>> sample_cots;
  std::vector<GradientBuffers> worker_grads;
};

// One optimization step: record-forward the batch at the stage's recursion
// depth, assemble loss cotangents, run the backward pass, apply one adaptive
// update.  Aborts (throws, parameters untouched) when the loss is not
// finite.  frozen_normal_targets, when given, replaces the per-sample
// analytic normal targets (index: ray, then sample) for derivative checks.
StepMetrics train_step(
    FieldParams& params, TrainWorkspace& ws, OptimState& optim,
    const TrainBatch& batch, const Schedule& schedule, const TrainConfig& cfg,
    Rng& rng,
    const std::vector<std::vector<std::pair<int, Vec3>>>* frozen_normal_targets =
        nullptr);

// Loss evaluation identical to train_step's (same gates and variants)
// without any gradient work; used for finite-difference probes.
double eval_total_loss(
    const FieldParams& params, TrainWorkspace& ws, const TrainBatch& batch,
    const StageSpec& stage, const Vec3& k_color, const TrainConfig& cfg, Rng& rng,
    const std::vector<std::vector<std::pair<int, Vec3>>>* frozen_normal_targets =
        nullptr);

TraceParams trace_params_from(const TrainConfig& cfg);

}  // namespace mirrorfield
