// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "mirrorfield/dataset.hpp"
#include "mirrorfield/train.hpp"

namespace mirrorfield {

// One step's rays: a single random view, pixels drawn with replacement.
TrainBatch sample_batch(const SceneDataset& ds, const TrainConfig& cfg, Rng& rng);

struct TrainResult {
  FieldParams params;
  OptimState optim;
};

// Called after every step; may inspect the evolving parameters (for logging
// and periodic checkpoints).
using StepCallback = std::function<void(
    int step, const StepMetrics&, const FieldParams&, const OptimState&)>;

// Full run: fresh field, stage schedule from the config, cfg.steps updates.
// Deterministic for a given config and dataset.  A warm start continues from
// the given parameters and optimizer state instead.
TrainResult run_training(const SceneDataset& ds, const TrainConfig& cfg,
                         const StepCallback& on_step = {},
                         const FieldParams* warm_params = nullptr,
                         const OptimState* warm_optim = nullptr);

}  // namespace mirrorfield
