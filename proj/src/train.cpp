// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/train.hpp"

#include <algorithm>
#include <cmath>

#include "mirrorfield/threading.hpp"

namespace mirrorfield {

namespace {
constexpr std::uint64_t kQuadTag = 0x71756164ull;
}

TraceParams trace_params_from(const TrainConfig& cfg) {
  TraceParams tp;
  tp.tau = cfg.tau;
  tp.epsilon = cfg.epsilon;
  tp.term_eps = cfg.term_eps;
  tp.skip_eps = cfg.skip_eps;
  return tp;
}

Schedule make_schedule(const TrainConfig& cfg) {
  Schedule s;
  s.stage1_end = std::max(1, static_cast<int>(std::lround(cfg.stage1_frac * cfg.steps)));
  s.stage2_end = std::max(s.stage1_end,
                          static_cast<int>(std::lround(cfg.stage2_frac * cfg.steps)));
  s.k_color = cfg.k_color;

  LossWeights first_only;
  first_only.lambda_c = cfg.weights.lambda_c;
  first_only.lambda_m = 0;
  first_only.lambda_pc = 0;
  first_only.lambda_n = 0;
  first_only.lambda_nreg = 0;

  s.stages[0].weights = first_only;
  s.stages[1].weights = cfg.weights;
  s.stages[2].weights = cfg.weights;
  for (int i = 0; i < 3; ++i) {
    s.stages[i].variant = cfg.stage_masked[i] ? PhotometricVariant::Masked
                                              : PhotometricVariant::Full;
    const int d = cfg.stage_max_depth[i];
    s.stages[i].max_depth = d < 0 ? cfg.max_depth : d;
  }
  return s;
}

const StageSpec& schedule_at(const Schedule& s, int step, int* stage_index) {
  int idx;
  if (step < s.stage1_end)
    idx = 0;
  else if (step < s.stage2_end)
    idx = 1;
  else
    idx = 2;
  if (stage_index) *stage_index = idx;
  return s.stages[idx];
}

double loss_photometric(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
  if (pred.size() != gt.size()) throw ShapeError("pred/gt length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += norm2(pred[i] - gt[i]);
  return total;
}

double loss_masked_photometric(const std::vector<Vec3>& pred,
                               const std::vector<Vec3>& gt,
                               const std::vector<std::uint8_t>& mask,
                               const Vec3& k) {
  if (pred.size() != gt.size() || pred.size() != mask.size())
    throw ShapeError("pred/gt/mask length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    total += norm2(pred[i] - (mask[i] ? k : gt[i]));
  return total;
}

double loss_mask_bce(const std::vector<double>& pred_m,
                     const std::vector<std::uint8_t>& gt_m, double clamp_eps) {
  if (pred_m.size() != gt_m.size()) throw ShapeError("pred/gt length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < pred_m.size(); ++i) {
    const double p = std::clamp(pred_m[i], clamp_eps, 1.0 - clamp_eps);
    total -= gt_m[i] ? std::log(p) : std::log(1.0 - p);
  }
  return total;
}

double loss_plane_consistency(const std::vector<std::array<Vec3, 4>>& quads) {
  if (quads.empty()) return 0;
  double total = 0;
  for (const auto& q : quads) {
    const Vec3 v1 = q[1] - q[0];
    const Vec3 v2 = q[2] - q[0];
    const Vec3 v3 = q[3] - q[0];
    total += std::abs(dot(cross(v1, v2), v3));
  }
  return total / static_cast<double>(quads.size());
}

double loss_forward_normal(const std::vector<Vec3>& normals,
                           const std::vector<Vec3>& ray_dirs) {
  if (normals.size() != ray_dirs.size()) throw ShapeError("length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double v = std::max(0.0, dot(normals[i], ray_dirs[i]));
    total += v * v;
  }
  return total;
}

double loss_normal_supervision(const std::vector<Vec3>& smoothed,
                               const std::vector<Vec3>& analytic,
                               const std::vector<double>& weights) {
  if (smoothed.size() != analytic.size() || smoothed.size() != weights.size())
    throw ShapeError("length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < smoothed.size(); ++i)
    total += weights[i] * norm2(smoothed[i] - analytic[i]);
  return total;
}

double total_loss(const LossParts& p, const LossWeights& w) {
  return w.lambda_c * p.photometric + w.lambda_m * p.mask_bce +
         w.lambda_pc * p.plane + w.lambda_n * p.normal_sup +
         w.lambda_nreg * p.normal_reg;
}

namespace {

// Draws n_quads sets of four distinct indices into `eligible`.
std::vector<std::array<int, 4>> select_quad_indices(
    const std::vector<int>& eligible, Rng& rng, int n_quads) {
  std::vector<std::array<int, 4>> out;
  if (static_cast<int>(eligible.size()) < 4 || n_quads < 1) return out;
  out.reserve(n_quads);
  for (int q = 0; q < n_quads; ++q) {
    std::array<int, 4> pick{};
    int got = 0;
    while (got < 4) {
      const int cand =
          eligible[static_cast<std::size_t>(rng.uniform_index(eligible.size()))];
      bool dup = false;
      for (int j = 0; j < got; ++j) dup = dup || pick[j] == cand;
      if (!dup) pick[got++] = cand;
    }
    out.push_back(pick);
  }
  return out;
}

struct AnalyticRegSample {
  int ray = 0, sample = 0;
  Vec3 grad_dir;   // unit density gradient direction (= -n_a)
  double grad_len = 0;
  double v = 0;    // max(0, n_a . d)
};

struct Assembly {
  LossParts parts;
  std::vector<std::array<int, 4>> quad_rays;
  std::vector<AnalyticRegSample> analytic_reg;
};

// Computes every stage loss over the recorded rays and, when cotangents is
// true, writes dLoss/d(ray outputs) into ws.cotangents / ws.sample_cots.
Assembly assemble_losses(
    const FieldParams& field, TrainWorkspace& ws, const TrainBatch& batch,
    const StageSpec& stage, const Vec3& k_color, const TrainConfig& cfg,
    Rng& quad_rng, bool cotangents,
    const std::vector<std::vector<std::pair<int, Vec3>>>* frozen_targets) {
  Assembly out;
  const std::size_t B = batch.rays.size();
  const LossWeights& w = stage.weights;

  if (cotangents) {
    ws.cotangents.assign(B, RayCotangent{});
    ws.sample_cots.resize(B);
  }

  const double fd_h = 0.5 * field.density.min_cell_size();

  for (std::size_t i = 0; i < B; ++i) {
    const RayRec& rec = ws.records[i];
    RayCotangent* cot = cotangents ? &ws.cotangents[i] : nullptr;

    const Vec3 target = stage.variant == PhotometricVariant::Masked && batch.mask[i]
                            ? k_color
                            : batch.gt_color[i];
    const Vec3 diff = rec.color_p - target;
    out.parts.photometric += norm2(diff);
    if (cot) cot->color_p = diff * (2.0 * w.lambda_c);

    if (w.lambda_m > 0) {
      const double m_hat = rec.rad.reflprob;
      const double p = std::clamp(m_hat, cfg.bce_clamp, 1.0 - cfg.bce_clamp);
      out.parts.mask_bce -= batch.mask[i] ? std::log(p) : std::log(1.0 - p);
      if (cot && m_hat > cfg.bce_clamp && m_hat < 1.0 - cfg.bce_clamp)
        cot->reflprob += w.lambda_m * (batch.mask[i] ? -1.0 / p : 1.0 / (1.0 - p));
    }

    const bool need_samples =
        (w.lambda_n > 0 || w.lambda_nreg > 0) && !rec.empty && rec.marched > 0;
    if (need_samples) {
      std::vector<SampleCot>* scots = nullptr;
      if (cotangents) {
        ws.sample_cots[i].assign(rec.samples.size(), SampleCot{});
        scots = &ws.sample_cots[i];
        cot->samples = scots;
      }
      // Frozen targets are keyed by sample index.
      const std::vector<std::pair<int, Vec3>>* frozen =
          frozen_targets ? &(*frozen_targets)[i] : nullptr;

      for (int j = 0; j < rec.marched; ++j) {
        const SampleRec& s = rec.samples[j];
        if (!s.queried || !s.n_ok) continue;
        const Vec3 n_hat = s.nraw / s.nlen;

        if (w.lambda_n > 0) {
          bool have_target = false;
          Vec3 target_n;
          if (frozen) {
            for (const auto& [idx, t] : *frozen) {
              if (idx == j) {
                have_target = true;
                target_n = t;
                break;
              }
            }
          } else if (s.w > cfg.nsup_weight_gate) {
            have_target = analytical_normal_at(field, s.p, &target_n, fd_h);
          }
          if (have_target) {
            const Vec3 d = n_hat - target_n;
            out.parts.normal_sup += s.w * norm2(d);
            if (scots) {
              (*scots)[j].normal += d * (2.0 * w.lambda_n * s.w);
              (*scots)[j].w += w.lambda_n * norm2(d);
            }
          }
        }

        if (w.lambda_nreg > 0 && s.w > cfg.nreg_weight_gate) {
          if (!cfg.nreg_on_analytic) {
            const double v = dot(n_hat, rec.ray.dir);
            if (v > 0) {
              out.parts.normal_reg += v * v;
              if (scots) (*scots)[j].normal += rec.ray.dir * (2.0 * w.lambda_nreg * v);
            }
          } else {
            // Facing penalty on the density-derived normal; its gradient
            // reaches the density grid directly (handled after the main
            // backward pass).
            Vec3 g;
            for (int a = 0; a < 3; ++a) {
              Vec3 hi_p = s.p, lo_p = s.p;
              hi_p[a] += fd_h;
              lo_p[a] -= fd_h;
              g[a] = (query_density(field, hi_p) - query_density(field, lo_p)) /
                     (2.0 * fd_h);
            }
            const double glen = norm(g);
            if (glen >= 1e-8) {
              const Vec3 n_a = g / (-glen);
              const double v = dot(n_a, rec.ray.dir);
              if (v > 0) {
                out.parts.normal_reg += v * v;
                if (cotangents) {
                  AnalyticRegSample ar;
                  ar.ray = static_cast<int>(i);
                  ar.sample = j;
                  ar.grad_dir = g / glen;
                  ar.grad_len = glen;
                  ar.v = v;
                  out.analytic_reg.push_back(ar);
                }
              }
            }
          }
        }
      }
    }
  }

  if (w.lambda_pc > 0) {
    std::vector<int> eligible;
    for (std::size_t i = 0; i < B; ++i) {
      if (batch.mask[i] && !ws.records[i].empty &&
          ws.records[i].rad.opacity >= cfg.quad_opacity_floor)
        eligible.push_back(static_cast<int>(i));
    }
    out.quad_rays = select_quad_indices(eligible, quad_rng, cfg.quads_per_step);
    if (!out.quad_rays.empty()) {
      const double inv_n = 1.0 / static_cast<double>(out.quad_rays.size());
      for (const auto& qr : out.quad_rays) {
        Vec3 x[4];
        for (int kk = 0; kk < 4; ++kk) {
          const RayRec& r = ws.records[qr[kk]];
          x[kk] = r.ray.origin + r.ray.dir * r.rad.depth;
        }
        const Vec3 v1 = x[1] - x[0];
        const Vec3 v2 = x[2] - x[0];
        const Vec3 v3 = x[3] - x[0];
        const double s = dot(cross(v1, v2), v3);
        out.parts.plane += std::abs(s) * inv_n;
        if (cotangents && s != 0.0) {
          const double scale = w.lambda_pc * inv_n * (s > 0 ? 1.0 : -1.0);
          const Vec3 d1 = cross(v2, v3);
          const Vec3 d2 = cross(v3, v1);
          const Vec3 d3 = cross(v1, v2);
          const Vec3 xbar[4] = {-(d1 + d2 + d3) * scale, d1 * scale, d2 * scale,
                                d3 * scale};
          for (int kk = 0; kk < 4; ++kk) {
            ws.cotangents[qr[kk]].depth +=
                dot(xbar[kk], ws.records[qr[kk]].ray.dir);
          }
        }
      }
    }
  }

  return out;
}

void forward_batch(const FieldParams& field, TrainWorkspace& ws,
                   const TrainBatch& batch, const StageSpec& stage,
                   const TrainConfig& cfg, const Rng& rng) {
  const std::size_t B = batch.rays.size();
  ws.records.resize(B);
  const TraceParams tp = trace_params_from(cfg);
  parallel_for(0, B, [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      forward_records(field, batch.rays[i], stage.max_depth, cfg.n_samples,
                      rng.fork(i), tp, ws.records[i]);
    }
  });
}

double cosine_lr(const TrainConfig& cfg, std::int64_t step) {
  if (!cfg.cosine_decay || cfg.steps <= 0) return cfg.lr;
  const double lr_final = cfg.lr * cfg.lr_final_frac;
  const double f =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(cfg.steps));
  return lr_final + 0.5 * (cfg.lr - lr_final) * (1.0 + std::cos(M_PI * f));
}

void adam_update(std::vector<float>& params_data, const std::vector<double>& grad,
                 std::vector<float>& m, std::vector<float>& v, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
  const std::size_t n = params_data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    float& mi = m[i];
    float& vi = v[i];
    if (g == 0.0 && mi == 0.0f && vi == 0.0f) continue;
    const double m_new = beta1 * mi + (1.0 - beta1) * g;
    const double v_new = beta2 * vi + (1.0 - beta2) * g * g;
    mi = static_cast<float>(m_new);
    vi = static_cast<float>(v_new);
    const double step_val = lr * (m_new / bc1) / (std::sqrt(v_new / bc2) + eps);
    params_data[i] = static_cast<float>(params_data[i] - step_val);
  }
}

}  // namespace

std::vector<std::array<Vec3, 4>> sample_plane_quads(const TrainBatch& batch,
                                                    const FieldParams& field,
                                                    Rng& rng, int n_quads,
                                                    const TrainConfig& cfg) {
  const TraceParams tp = trace_params_from(cfg);
  std::vector<int> eligible;
  std::vector<Vec3> points(batch.rays.size());
  for (std::size_t i = 0; i < batch.rays.size(); ++i) {
    if (!batch.mask[i]) continue;
    Rng rr = rng.fork(i);
    const RayRadiometry rad =
        render_primary(field, batch.rays[i], cfg.n_samples, rr, tp);
    if (rad.opacity >= cfg.quad_opacity_floor) {
      eligible.push_back(static_cast<int>(i));
      points[i] = batch.rays[i].origin + batch.rays[i].dir * rad.depth;
    }
  }
  Rng qrng = rng.fork(kQuadTag);
  const auto idx = select_quad_indices(eligible, qrng, n_quads);
  std::vector<std::array<Vec3, 4>> out;
  out.reserve(idx.size());
  for (const auto& q : idx)
    out.push_back({points[q[0]], points[q[1]], points[q[2]], points[q[3]]});
  return out;
}

void OptimState::resize_like(const FieldParams& p) {
  m_density.assign(p.density.size(), 0.0f);
  v_density.assign(p.density.size(), 0.0f);
  m_sh.assign(p.sh.size(), 0.0f);
  v_sh.assign(p.sh.size(), 0.0f);
  m_normal.assign(p.normal.size(), 0.0f);
  v_normal.assign(p.normal.size(), 0.0f);
  m_reflprob.assign(p.reflprob.size(), 0.0f);
  v_reflprob.assign(p.reflprob.size(), 0.0f);
}

double eval_total_loss(
    const FieldParams& params, TrainWorkspace& ws, const TrainBatch& batch,
    const StageSpec& stage, const Vec3& k_color, const TrainConfig& cfg, Rng& rng,
    const std::vector<std::vector<std::pair<int, Vec3>>>* frozen_normal_targets) {
  forward_batch(params, ws, batch, stage, cfg, rng);
  Rng quad_rng = rng.fork(kQuadTag);
  const Assembly a = assemble_losses(params, ws, batch, stage, k_color, cfg,
                                     quad_rng, false, frozen_normal_targets);
  return total_loss(a.parts, stage.weights);
}

StepMetrics train_step(
    FieldParams& params, TrainWorkspace& ws, OptimState& optim,
    const TrainBatch& batch, const Schedule& schedule, const TrainConfig& cfg,
    Rng& rng,
    const std::vector<std::vector<std::pair<int, Vec3>>>* frozen_normal_targets) {
  if (batch.rays.empty()) throw ShapeError("empty batch");
  if (batch.rays.size() != batch.gt_color.size() ||
      batch.rays.size() != batch.mask.size())
    throw ShapeError("batch field lengths differ");

  StepMetrics metrics;
  const StageSpec& stage =
      schedule_at(schedule, static_cast<int>(optim.step), &metrics.stage);

  forward_batch(params, ws, batch, stage, cfg, rng);
  for (const RayRec& r : ws.records)
    if (r.spawned) ++metrics.spawned_rays;

  Rng quad_rng = rng.fork(kQuadTag);
  const Assembly a = assemble_losses(params, ws, batch, stage, schedule.k_color,
                                     cfg, quad_rng, true, frozen_normal_targets);
  metrics.parts = a.parts;
  metrics.total = total_loss(a.parts, stage.weights);
  if (!std::isfinite(metrics.total))
    throw Error("non-finite loss at step " + std::to_string(optim.step));

  // Backward: worker 0 writes straight into the first buffer, extra workers
  // into their own, merged in worker order.
  const int workers = worker_count();
  if (static_cast<int>(ws.worker_grads.size()) < workers)
    ws.worker_grads.resize(workers);
  for (int wk = 0; wk < workers; ++wk) {
    if (ws.worker_grads[wk].density.size() != params.density.size())
      ws.worker_grads[wk].resize_like(params);
    else
      ws.worker_grads[wk].clear();
  }
  parallel_for(0, batch.rays.size(), [&](int wk, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      backward_records(params, ws.records[i], ws.cotangents[i],
                       ws.worker_grads[wk], nullptr, nullptr);
    }
  });
  GradientBuffers& grad = ws.worker_grads[0];
  for (int wk = 1; wk < workers; ++wk) grad.add(ws.worker_grads[wk]);

  // Direct density-grid path of the analytic-normal facing penalty.
  if (!a.analytic_reg.empty()) {
    const double fd_h = 0.5 * params.density.min_cell_size();
    const double lam = stage.weights.lambda_nreg;
    for (const AnalyticRegSample& ar : a.analytic_reg) {
      const SampleRec& s = ws.records[ar.ray].samples[ar.sample];
      const Vec3 d = ws.records[ar.ray].ray.dir;
      const Vec3 n_a = -ar.grad_dir;
      const Vec3 nbar = d * (2.0 * lam * ar.v);
      const Vec3 gbar = -(nbar - n_a * dot(nbar, n_a)) / ar.grad_len;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 hi_p = s.p, lo_p = s.p;
        hi_p[axis] += fd_h;
        lo_p[axis] -= fd_h;
        backward_density(params, grad, hi_p, gbar[axis] / (2.0 * fd_h));
        backward_density(params, grad, lo_p, -gbar[axis] / (2.0 * fd_h));
      }
    }
  }

  const double lr = cosine_lr(cfg, optim.step);
  metrics.lr = lr;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, optim.step + 1);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, optim.step + 1);
  adam_update(params.density.data, grad.density, optim.m_density, optim.v_density,
              lr * cfg.lr_density_mult, cfg.adam_beta1, cfg.adam_beta2,
              cfg.adam_eps, bc1, bc2);
  adam_update(params.sh.data, grad.sh, optim.m_sh, optim.v_sh,
              lr * cfg.lr_sh_mult, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
              bc1, bc2);
  adam_update(params.normal.data, grad.normal, optim.m_normal, optim.v_normal,
              lr * cfg.lr_normal_mult, cfg.adam_beta1, cfg.adam_beta2,
              cfg.adam_eps, bc1, bc2);
  adam_update(params.reflprob.data, grad.reflprob, optim.m_reflprob,
              optim.v_reflprob, lr * cfg.lr_reflprob_mult, cfg.adam_beta1,
              cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  ++optim.step;
  return metrics;
}

}  // namespace mirrorfield
