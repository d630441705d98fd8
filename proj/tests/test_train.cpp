// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mirrorfield/dataset.hpp"
#include "mirrorfield/train.hpp"
#include "mirrorfield/trainer.hpp"
#include "support.hpp"

using namespace mirrorfield;
using mftest::paint1;
using mftest::paint_color;

namespace {

const Aabb kBox{{-1, -1, -1}, {1, 1, 1}};

Ray axis_ray(const Vec3& origin, const Vec3& dir) {
  Ray r;
  r.origin = origin;
  r.dir = dir;
  r.bounce = 0;
  r.t_min = 0.02;
  r.t_max = 4.0;
  return r;
}

// Mirror slab facing -x plus a wall behind the camera; rays along +x from
// x < 0 reflect back onto the wall.
FieldParams mirror_room() {
  FieldParams f = make_field(kBox, 12, 2);
  f.density.fill(-40.0f);
  auto slab = [](const Vec3& p) { return p.x >= 0.3 && p.x <= 0.65; };
  auto wall = [](const Vec3& p) { return p.x <= -0.65; };
  paint1(f.density, slab, 60.0f);
  paint1(f.density, wall, 60.0f);
  paint_color(f.sh, slab, {0.15, 0.15, 0.15});
  paint_color(f.sh, wall, {0.7, 0.25, 0.2});
  paint1(f.reflprob, slab, 6.0f);
  paint1(f.reflprob, wall, -12.0f);
  const float toward_cam[3] = {-5, 0, 0};
  mftest::paint(f.normal, slab, toward_cam, 0, 3);
  const float away[3] = {5, 0, 0};
  mftest::paint(f.normal, wall, away, 0, 3);
  return f;
}

TrainBatch mirror_batch(int n_rays) {
  TrainBatch b;
  Rng rng(31);
  for (int i = 0; i < n_rays; ++i) {
    double y = rng.uniform(-0.3, 0.3);
    double z = rng.uniform(-0.3, 0.3);
    b.rays.push_back(axis_ray({-0.55, y, z}, {1, 0, 0}));
    b.gt_color.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    b.mask.push_back(1);
  }
  return b;
}

Schedule single_stage(const TrainConfig& cfg, PhotometricVariant variant,
                      int max_depth) {
  Schedule s = make_schedule(cfg);
  s.stage1_end = 0;
  s.stage2_end = 0;
  s.stages[2].weights = cfg.weights;
  s.stages[2].variant = variant;
  s.stages[2].max_depth = max_depth;
  return s;
}

}  // namespace

TEST_CASE("photometric loss closed forms") {
  std::vector<Vec3> gt{{0.2, 0.4, 0.6}, {0.1, 0.1, 0.1}};
  CHECK(loss_photometric(gt, gt) == 0.0);
  std::vector<Vec3> pred{{0.3, 0.4, 0.6}, {0.1, 0.1, 0.1}};
  CHECK(loss_photometric(pred, gt) == doctest::Approx(0.01).epsilon(1e-12));
  pred[1] = {0.1, 0.3, 0.1};
  CHECK(loss_photometric(pred, gt) == doctest::Approx(0.01 + 0.04).epsilon(1e-12));
}

TEST_CASE("photometric loss matches an elementwise loop") {
  Rng rng(3);
  std::vector<Vec3> pred, gt;
  for (int i = 0; i < 64; ++i) {
    pred.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    gt.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  }
  double want = 0;
  for (int i = 0; i < 64; ++i)
    for (int c = 0; c < 3; ++c) {
      double d = pred[i][c] - gt[i][c];
      want += d * d;
    }
  CHECK(loss_photometric(pred, gt) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("masked photometric substitutes the fill color on masked rays") {
  std::vector<Vec3> pred{{1, 0, 0}};
  std::vector<Vec3> gt{{0.3, 0.9, 0.2}};
  std::vector<std::uint8_t> mask{1};
  CHECK(loss_masked_photometric(pred, gt, mask, {1, 0, 0}) == 0.0);
  mask[0] = 0;
  CHECK(loss_masked_photometric(pred, gt, mask, {1, 0, 0}) ==
        doctest::Approx(loss_photometric(pred, gt)).epsilon(1e-12));
}

TEST_CASE("mask cross entropy closed forms") {
  CHECK(loss_mask_bce({0.5}, {1}, 1e-6) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(loss_mask_bce({1.0}, {1}, 1e-6) == doctest::Approx(1e-6).epsilon(1e-3));
  CHECK(loss_mask_bce({0.9}, {0}, 1e-6) ==
        doctest::Approx(-std::log(0.1)).epsilon(1e-9));
  CHECK(loss_mask_bce({0.0}, {0}, 1e-6) == doctest::Approx(1e-6).epsilon(1e-3));
}

TEST_CASE("plane consistency scores the scalar triple product") {
  std::array<Vec3, 4> flat{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 0}};
  CHECK(loss_plane_consistency({flat}) == 0.0);
  std::array<Vec3, 4> tetra{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  CHECK(loss_plane_consistency({tetra}) == doctest::Approx(1.0).epsilon(1e-12));
  std::array<Vec3, 4> swapped{tetra[0], tetra[2], tetra[1], tetra[3]};
  CHECK(loss_plane_consistency({swapped}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loss_plane_consistency({tetra, flat}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward-facing normal penalty uses the clamped dot") {
  std::vector<Vec3> n{{0, 1, 0}};
  std::vector<Vec3> d{{1, 0, 0}};
  CHECK(loss_forward_normal(n, d) == 0.0);
  n[0] = Vec3{0.5, std::sqrt(0.75), 0};
  CHECK(loss_forward_normal(n, d) == doctest::Approx(0.25).epsilon(1e-12));
  n[0] = {-0.7, std::sqrt(1 - 0.49), 0};
  CHECK(loss_forward_normal(n, d) == 0.0);
}

TEST_CASE("normal supervision compares weighted unit vectors") {
  std::vector<Vec3> smoothed{{0, 0, 1}};
  std::vector<Vec3> target{{0, 0, 1}};
  std::vector<double> w{1.0};
  CHECK(loss_normal_supervision(smoothed, target, w) == 0.0);
  target[0] = {0, 0, -1};
  CHECK(loss_normal_supervision(smoothed, target, w) == doctest::Approx(4.0).epsilon(1e-12));
  w[0] = 0.0;
  CHECK(loss_normal_supervision(smoothed, target, w) == 0.0);
  w[0] = 0.25;
  CHECK(loss_normal_supervision(smoothed, target, w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total loss is linear in the stage weights") {
  LossParts parts;
  parts.photometric = 0.7;
  parts.mask_bce = 0.3;
  parts.plane = 0.11;
  parts.normal_sup = 0.05;
  parts.normal_reg = 0.02;
  LossWeights w;
  w.lambda_c = 1.0;
  w.lambda_m = 0.1;
  w.lambda_pc = 0.01;
  w.lambda_n = 0.02;
  w.lambda_nreg = 0.03;
  double want = 0.7 + 0.1 * 0.3 + 0.01 * 0.11 + 0.02 * 0.05 + 0.03 * 0.02;
  CHECK(total_loss(parts, w) == doctest::Approx(want).epsilon(1e-12));

  LossWeights doubled = w;
  doubled.lambda_m *= 2;
  CHECK(total_loss(parts, doubled) - total_loss(parts, w) ==
        doctest::Approx(0.1 * 0.3).epsilon(1e-12));
}

TEST_CASE("losses are invariant under input permutation") {
  Rng rng(5);
  std::vector<Vec3> pred, gt, normals, dirs, targets;
  std::vector<std::uint8_t> mask;
  std::vector<double> pm, w;
  std::vector<std::uint8_t> gtm;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    pred.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    gt.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    mask.push_back(rng.uniform() < 0.4 ? 1 : 0);
    pm.push_back(rng.uniform(0.01, 0.99));
    gtm.push_back(rng.uniform() < 0.5 ? 1 : 0);
    normals.push_back(normalized(rng.gaussian3()));
    dirs.push_back(normalized(rng.gaussian3()));
    targets.push_back(normalized(rng.gaussian3()));
    w.push_back(rng.uniform());
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle_rng(6);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(shuffle_rng.uniform_index(i + 1))]);

  auto apply = [&](auto& src) {
    auto out = src;
    for (int i = 0; i < n; ++i) out[i] = src[perm[i]];
    return out;
  };
  auto pred_p = apply(pred);
  auto gt_p = apply(gt);
  auto mask_p = apply(mask);
  auto pm_p = apply(pm);
  auto gtm_p = apply(gtm);
  auto normals_p = apply(normals);
  auto dirs_p = apply(dirs);
  auto targets_p = apply(targets);
  auto w_p = apply(w);

  CHECK(loss_photometric(pred_p, gt_p) ==
        doctest::Approx(loss_photometric(pred, gt)).epsilon(1e-10));
  CHECK(loss_masked_photometric(pred_p, gt_p, mask_p, {0.2, 0.2, 0.2}) ==
        doctest::Approx(loss_masked_photometric(pred, gt, mask, {0.2, 0.2, 0.2}))
            .epsilon(1e-10));
  CHECK(loss_mask_bce(pm_p, gtm_p, 1e-6) ==
        doctest::Approx(loss_mask_bce(pm, gtm, 1e-6)).epsilon(1e-10));
  CHECK(loss_forward_normal(normals_p, dirs_p) ==
        doctest::Approx(loss_forward_normal(normals, dirs)).epsilon(1e-10));
  CHECK(loss_normal_supervision(normals_p, targets_p, w_p) ==
        doctest::Approx(loss_normal_supervision(normals, targets, w)).epsilon(1e-10));
}

TEST_CASE("stage schedule splits at rounded fractions") {
  TrainConfig cfg;
  cfg.steps = 100;
  Schedule s = make_schedule(cfg);
  CHECK(s.stage1_end == 20);
  CHECK(s.stage2_end == 60);

  int stage = -1;
  const StageSpec& first = schedule_at(s, 0, &stage);
  CHECK(stage == 0);
  CHECK(first.variant == PhotometricVariant::Masked);
  CHECK(first.max_depth == 0);
  CHECK(first.weights.lambda_c == cfg.weights.lambda_c);
  CHECK(first.weights.lambda_m == 0.0);
  CHECK(first.weights.lambda_pc == 0.0);
  CHECK(first.weights.lambda_n == 0.0);
  CHECK(first.weights.lambda_nreg == 0.0);

  schedule_at(s, 19, &stage);
  CHECK(stage == 0);
  const StageSpec& mid = schedule_at(s, 20, &stage);
  CHECK(stage == 1);
  CHECK(mid.variant == PhotometricVariant::Masked);
  CHECK(mid.max_depth == 0);
  CHECK(mid.weights.lambda_m == cfg.weights.lambda_m);
  CHECK(mid.weights.lambda_pc == cfg.weights.lambda_pc);

  schedule_at(s, 59, &stage);
  CHECK(stage == 1);
  const StageSpec& last = schedule_at(s, 60, &stage);
  CHECK(stage == 2);
  CHECK(last.variant == PhotometricVariant::Full);
  CHECK(last.max_depth == cfg.max_depth);
  schedule_at(s, 5000, &stage);
  CHECK(stage == 2);
}

TEST_CASE("tiny step counts still give every stage at least one step") {
  TrainConfig cfg;
  cfg.steps = 3;
  Schedule s = make_schedule(cfg);
  CHECK(s.stage1_end >= 1);
  CHECK(s.stage2_end > s.stage1_end);
}

TEST_CASE("trace parameters come straight from the config") {
  TrainConfig cfg;
  cfg.tau = 0.07;
  cfg.epsilon = 0.04;
  cfg.term_eps = 1e-9;
  cfg.skip_eps = 1e-10;
  TraceParams tp = trace_params_from(cfg);
  CHECK(tp.tau == 0.07);
  CHECK(tp.epsilon == 0.04);
  CHECK(tp.term_eps == 1e-9);
  CHECK(tp.skip_eps == 1e-10);
}

TEST_CASE("plane quads require at least four qualifying rays") {
  FieldParams f = mirror_room();
  TrainConfig cfg;
  TrainBatch small = mirror_batch(3);
  Rng rng(8);
  CHECK(sample_plane_quads(small, f, rng, 4, cfg).empty());

  TrainBatch empty_mask = mirror_batch(8);
  std::fill(empty_mask.mask.begin(), empty_mask.mask.end(), 0);
  Rng rng2(8);
  CHECK(sample_plane_quads(empty_mask, f, rng2, 4, cfg).empty());
}

TEST_CASE("plane quads are deterministic for a fixed seed") {
  FieldParams f = mirror_room();
  TrainConfig cfg;
  TrainBatch batch = mirror_batch(16);
  Rng a(9), b(9);
  auto qa = sample_plane_quads(batch, f, a, 6, cfg);
  auto qb = sample_plane_quads(batch, f, b, 6, cfg);
  REQUIRE(qa.size() == qb.size());
  CHECK(!qa.empty());
  for (std::size_t i = 0; i < qa.size(); ++i)
    for (int k = 0; k < 4; ++k) CHECK(norm(qa[i][k] - qb[i][k]) == 0.0);
  // Points come from rays hitting the slab face near x = 0.3, so the quad
  // loss over them is small but the points are genuinely 3D.
  for (const auto& q : qa)
    for (const auto& p : q) {
      CHECK(p.x > 0.0);
      CHECK(p.x < 0.6);
    }
}

TEST_CASE("zero loss weights leave parameters untouched") {
  FieldParams f = mirror_room();
  FieldParams before = f;
  TrainConfig cfg;
  cfg.weights = LossWeights{0, 0, 0, 0, 0};
  TrainWorkspace ws;
  OptimState optim;
  optim.resize_like(f);
  Schedule s = single_stage(cfg, PhotometricVariant::Full, 2);
  s.stages[2].weights = cfg.weights;
  TrainBatch batch = mirror_batch(8);
  Rng rng(10);
  StepMetrics m = train_step(f, ws, optim, batch, s, cfg, rng);
  CHECK(m.total == 0.0);
  CHECK(f.density.data == before.density.data);
  CHECK(f.sh.data == before.sh.data);
  CHECK(f.normal.data == before.normal.data);
  CHECK(f.reflprob.data == before.reflprob.data);
  CHECK(optim.step == 1);
}

TEST_CASE("training steps propagate gradients into all four grids") {
  FieldParams f = mirror_room();
  TrainConfig cfg;
  TrainWorkspace ws;
  OptimState optim;
  optim.resize_like(f);
  Schedule s = single_stage(cfg, PhotometricVariant::Full, 2);
  TrainBatch batch = mirror_batch(12);
  Rng rng(11);
  StepMetrics m = train_step(f, ws, optim, batch, s, cfg, rng);
  CHECK(m.spawned_rays > 0);
  CHECK(m.total > 0.0);

  auto linf = [](const std::vector<double>& v) {
    double best = 0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
  };
  REQUIRE(!ws.worker_grads.empty());
  CHECK(linf(ws.worker_grads[0].density) > 0.0);
  CHECK(linf(ws.worker_grads[0].sh) > 0.0);
  CHECK(linf(ws.worker_grads[0].normal) > 0.0);
  CHECK(linf(ws.worker_grads[0].reflprob) > 0.0);
}

TEST_CASE("reported totals match the standalone loss evaluation") {
  FieldParams f = mirror_room();
  FieldParams snapshot = f;
  TrainConfig cfg;
  TrainWorkspace ws;
  OptimState optim;
  optim.resize_like(f);
  Schedule s = single_stage(cfg, PhotometricVariant::Full, 2);
  TrainBatch batch = mirror_batch(10);
  Rng step_rng(12);
  StepMetrics m = train_step(f, ws, optim, batch, s, cfg, step_rng);

  TrainWorkspace ws2;
  Rng eval_rng(12);
  double evaluated =
      eval_total_loss(snapshot, ws2, batch, s.stages[2], s.k_color, cfg, eval_rng);
  CHECK(m.total == doctest::Approx(evaluated).epsilon(1e-12));
}

TEST_CASE("non-finite targets abort the step and keep parameters intact") {
  FieldParams f = mirror_room();
  FieldParams before = f;
  TrainConfig cfg;
  TrainWorkspace ws;
  OptimState optim;
  optim.resize_like(f);
  Schedule s = single_stage(cfg, PhotometricVariant::Full, 1);
  TrainBatch batch = mirror_batch(6);
  batch.gt_color[2].y = std::numeric_limits<double>::quiet_NaN();
  Rng rng(13);
  CHECK_THROWS_AS(train_step(f, ws, optim, batch, s, cfg, rng), Error);
  CHECK(f.density.data == before.density.data);
  CHECK(f.sh.data == before.sh.data);
}

TEST_CASE("frozen normal targets override the analytic supervision") {
  FieldParams f = mirror_room();
  TrainConfig cfg;
  TrainWorkspace ws;
  Schedule s = single_stage(cfg, PhotometricVariant::Full, 1);
  TrainBatch batch = mirror_batch(5);

  // Freezing every sample's target to +z changes the supervision term but
  // nothing else.
  std::vector<std::vector<std::pair<int, Vec3>>> frozen(batch.rays.size());
  Rng probe(14);
  double base = eval_total_loss(f, ws, batch, s.stages[2], s.k_color, cfg, probe);
  for (std::size_t i = 0; i < batch.rays.size(); ++i)
    for (int j = 0; j < cfg.n_samples; ++j) frozen[i].push_back({j, Vec3{0, 0, 1}});
  Rng probe2(14);
  double overridden =
      eval_total_loss(f, ws, batch, s.stages[2], s.k_color, cfg, probe2, &frozen);
  CHECK(base != overridden);

  LossWeights no_sup = cfg.weights;
  no_sup.lambda_n = 0.0;
  Schedule s2 = s;
  s2.stages[2].weights = no_sup;
  Rng probe3(14), probe4(14);
  double plain = eval_total_loss(f, ws, batch, s2.stages[2], s2.k_color, cfg, probe3);
  double plain_frozen =
      eval_total_loss(f, ws, batch, s2.stages[2], s2.k_color, cfg, probe4, &frozen);
  CHECK(plain == plain_frozen);
}

TEST_CASE("learning rate starts at the configured value and decays") {
  SceneDataset ds;
  AnalyticScene scene = builtin_scene("mirror-box");
  auto cams = orbit_cameras(2, 12, 12, 75.0, 0.55, 0.05, {0, 0, 0}, 0.0, 2 * M_PI);
  ds = generate_dataset(scene, cams, 4);

  TrainConfig cfg;
  cfg.resolution = 8;
  cfg.steps = 6;
  cfg.batch_rays = 16;
  cfg.n_samples = 8;
  cfg.log_every = 1;
  std::vector<double> lrs;
  run_training(ds, cfg, [&](int, const StepMetrics& m, const FieldParams&,
                            const OptimState&) { lrs.push_back(m.lr); });
  REQUIRE(lrs.size() == 6);
  CHECK(lrs[0] == doctest::Approx(cfg.lr).epsilon(1e-12));
  CHECK(lrs.back() < lrs.front());
  CHECK(lrs.back() > cfg.lr * cfg.lr_final_frac * 0.99);
}

TEST_CASE("a short run overfits one view and halves the photometric loss") {
  AnalyticScene scene = builtin_scene("mirror-box");
  // One camera looking at the lambertian corner away from the mirror.
  Camera cam = camera_from_fov(16, 16, 75.0);
  cam.cam_to_world = look_at({0.5, 0.1, 0.1}, {-0.8, -0.6, -0.4});
  SceneDataset ds = generate_dataset(scene, {cam}, 4);

  TrainConfig cfg;
  cfg.resolution = 16;
  cfg.steps = 200;
  cfg.batch_rays = 256;
  cfg.n_samples = 32;
  cfg.seed = 2;
  std::vector<double> photometric;
  run_training(ds, cfg, [&](int, const StepMetrics& m, const FieldParams&,
                            const OptimState&) {
    photometric.push_back(m.parts.photometric);
  });
  REQUIRE(photometric.size() == 200);
  double early = photometric[0];
  double late = 0;
  for (int i = 190; i < 200; ++i) late += photometric[i];
  late /= 10;
  CHECK(late < 0.5 * early);
}
