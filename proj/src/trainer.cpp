// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/trainer.hpp"

namespace mirrorfield {

namespace {
constexpr std::uint64_t kBatchTag = 0x62617463ull;
constexpr std::uint64_t kStepTag = 0x67726164ull;
}

TrainBatch sample_batch(const SceneDataset& ds, const TrainConfig& cfg, Rng& rng) {
  if (ds.views.empty()) throw ShapeError("dataset has no views");
  TrainBatch batch;
  batch.image_index = static_cast<int>(rng.uniform_index(ds.views.size()));
  const DatasetView& v = ds.views[batch.image_index];
  const std::size_t n_pixels = v.color.pixel_count();
  batch.rays.reserve(cfg.batch_rays);
  batch.gt_color.reserve(cfg.batch_rays);
  batch.mask.reserve(cfg.batch_rays);
  for (int i = 0; i < cfg.batch_rays; ++i) {
    const std::size_t pix = rng.uniform_index(n_pixels);
    const int row = static_cast<int>(pix) / v.color.width;
    const int col = static_cast<int>(pix) % v.color.width;
    batch.rays.push_back(pixel_ray(v.cam, row, col, cfg.t_min, cfg.t_max));
    batch.gt_color.push_back(v.color.rgb(row, col));
    batch.mask.push_back(v.mask.at(row, col, 0) != 0.0f ? 1 : 0);
  }
  return batch;
}

TrainResult run_training(const SceneDataset& ds, const TrainConfig& cfg,
                         const StepCallback& on_step,
                         const FieldParams* warm_params,
                         const OptimState* warm_optim) {
  TrainResult result;
  if (warm_params) {
    result.params = *warm_params;
  } else {
    Aabb box{cfg.bbox_min, cfg.bbox_max};
    result.params = make_field(box, cfg.resolution, cfg.sh_degree);
  }
  if (warm_optim) {
    result.optim = *warm_optim;
  } else {
    result.optim.resize_like(result.params);
  }

  const Schedule schedule = make_schedule(cfg);
  TrainWorkspace ws;
  const Rng root(cfg.seed);
  const std::int64_t start = result.optim.step;
  for (std::int64_t s = start; s < cfg.steps; ++s) {
    const Rng step_rng = root.fork(static_cast<std::uint64_t>(s));
    Rng batch_rng = step_rng.fork(kBatchTag);
    const TrainBatch batch = sample_batch(ds, cfg, batch_rng);
    Rng grad_rng = step_rng.fork(kStepTag);
    const StepMetrics metrics = train_step(result.params, ws, result.optim,
                                           batch, schedule, cfg, grad_rng);
    if (on_step)
      on_step(static_cast<int>(s), metrics, result.params, result.optim);
  }
  return result;
}

}  // namespace mirrorfield
