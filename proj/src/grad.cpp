// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/grad.hpp"

#include <cmath>

namespace mirrorfield {

namespace {
constexpr double kDegenerateWeight = 1e-4;
}

void forward_records(const FieldParams& field, const Ray& ray, int max_depth,
                     int n, const Rng& ray_rng, const TraceParams& params,
                     RayRec& out) {
  out.ray = ray;
  out.empty = true;
  out.marched = 0;
  out.samples.resize(n);
  out.rad = RayRadiometry{};
  out.sum_wt = 0;
  out.spawned = false;
  out.color_p = {0, 0, 0};

  Rng stream = ray_rng.fork(static_cast<std::uint64_t>(ray.bounce));
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = stream.uniform();

  double lo = ray.t_min, hi = ray.t_max;
  if (ray.bounce == 0) {
    double te, tx;
    if (!intersect_aabb(field.bbox(), ray.origin, ray.dir, te, tx)) return;
    lo = std::max(lo, te);
    hi = std::min(hi, tx);
  }
  if (lo >= hi) return;
  out.empty = false;
  out.lo = lo;
  out.hi = hi;

  const SampleSet s = samples_from_jitter(lo, hi, n, u.data());
  RayRadiometry& rad = out.rad;
  double transmittance = 1.0;
  for (int i = 0; i < n; ++i) {
    SampleRec& rec = out.samples[i];
    rec = SampleRec{};
    rec.t = s.t[i];
    rec.delta = s.delta[i];
    rec.p = ray.origin + ray.dir * s.t[i];
    rec.transmittance = transmittance;
    rec.sigma = query_density(field, rec.p);
    rec.passed = std::exp(-rec.sigma * rec.delta);
    rec.w = transmittance * (1.0 - rec.passed);
    if (rec.w >= params.skip_eps && rec.w > 0.0) {
      rec.queried = true;
      rec.color = query_radiance(field, rec.p, ray.dir);
      rad.color += rec.color * rec.w;
      rec.nraw = query_normal_raw(field, rec.p);
      rec.nlen = norm(rec.nraw);
      if (rec.nlen < 1e-8) {
        if (rec.w > kDegenerateWeight)
          throw DegenerateNormalError("degenerate normal at high-weight sample");
      } else {
        rec.n_ok = true;
        rad.normal += rec.nraw * (rec.w / rec.nlen);
      }
      rec.m = query_reflection_prob(field, rec.p);
      rad.reflprob += rec.m * rec.w;
      rad.opacity += rec.w;
      out.sum_wt += rec.w * s.t[i];
    }
    transmittance *= rec.passed;
    out.marched = i + 1;
    if (transmittance < params.term_eps) break;
  }
  rad.depth = rad.opacity > 0.0 ? out.sum_wt / rad.opacity : 0.0;

  const bool spawn = ray.bounce < max_depth && rad.reflprob > params.tau &&
                     norm(rad.normal) >= 1e-6;
  if (!spawn) {
    out.color_p = rad.color;
    return;
  }

  out.spawned = true;
  out.nu = normalized(rad.normal);
  const Vec3 h = ray.dir - out.nu * (2.0 * dot(ray.dir, out.nu));
  out.hlen = norm(h);

  Ray child;
  child.origin = ray.origin + ray.dir * rad.depth;
  child.dir = h / out.hlen;
  child.bounce = ray.bounce + 1;
  child.t_min = params.epsilon > 0.0 ? params.epsilon : 2.0 * (hi - lo) / n;
  child.t_max = params.child_t_max > 0.0 ? params.child_t_max : ray.t_max;

  if (!out.child) out.child = std::make_unique<RayRec>();
  forward_records(field, child, max_depth, n, ray_rng, params, *out.child);

  const double m = rad.reflprob;
  out.color_p = rad.color * (1.0 - m) + out.child->color_p * m;
}

void backward_records(const FieldParams& field, const RayRec& node,
                      const RayCotangent& cot, GradientBuffers& g,
                      Vec3* origin_bar, Vec3* dir_bar) {
  Vec3 obar{0, 0, 0}, dbar{0, 0, 0};
  if (node.empty) {
    if (origin_bar) *origin_bar = obar;
    if (dir_bar) *dir_bar = dbar;
    return;
  }

  const RayRadiometry& rad = node.rad;
  Vec3 Cbar;
  double Mbar = cot.reflprob;
  double Dbar = cot.depth;
  Vec3 Nbar{0, 0, 0};

  if (node.spawned) {
    RayCotangent child_cot;
    child_cot.color_p = cot.color_p * rad.reflprob;
    Vec3 obar_c, dbar_c;
    backward_records(field, *node.child, child_cot, g, &obar_c, &dbar_c);

    Cbar = cot.color_p * (1.0 - rad.reflprob);
    Mbar += dot(cot.color_p, node.child->color_p - rad.color);

    // Child origin o + D d.
    Dbar += dot(obar_c, node.ray.dir);
    obar += obar_c;
    dbar += obar_c * rad.depth;

    // Child direction: normalize(d - 2 (d.nu) nu).
    const Vec3 dirc = node.child->ray.dir;
    const Vec3 hbar = (dbar_c - dirc * dot(dbar_c, dirc)) / node.hlen;
    dbar += hbar - node.nu * (2.0 * dot(node.nu, hbar));
    const Vec3 nubar =
        (node.ray.dir * dot(hbar, node.nu) + hbar * dot(node.ray.dir, node.nu)) *
        -2.0;
    const double nrm = norm(rad.normal);
    Nbar += (nubar - node.nu * dot(nubar, node.nu)) / nrm;
  } else {
    Cbar = cot.color_p;
  }

  double Sbar = 0.0, Obar = 0.0;
  if (rad.opacity > 0.0) {
    Sbar = Dbar / rad.opacity;
    Obar = -Dbar * node.sum_wt / (rad.opacity * rad.opacity);
  }

  const int n = node.marched;
  std::vector<double> wbar(n, 0.0);
  std::vector<Vec3> pbar(n, Vec3{0, 0, 0});

  for (int i = 0; i < n; ++i) {
    const SampleRec& s = node.samples[i];
    if (!s.queried) continue;
    double wb = dot(Cbar, s.color) + Mbar * s.m + Sbar * s.t + Obar;
    if (s.n_ok) wb += dot(Nbar, s.nraw) / s.nlen;
    if (cot.samples) wb += (*cot.samples)[i].w;
    wbar[i] = wb;

    const Vec3 cbar_i = Cbar * s.w;
    if (cbar_i.x != 0.0 || cbar_i.y != 0.0 || cbar_i.z != 0.0)
      backward_radiance(field, g, s.p, node.ray.dir, cbar_i, &pbar[i], &dbar);
    if (s.n_ok) {
      Vec3 nbar_i = Nbar * s.w;
      if (cot.samples) nbar_i += (*cot.samples)[i].normal;
      if (nbar_i.x != 0.0 || nbar_i.y != 0.0 || nbar_i.z != 0.0)
        backward_normal(field, g, s.p, nbar_i, &pbar[i]);
    }
    const double mbar_i = Mbar * s.w;
    if (mbar_i != 0.0) backward_reflprob(field, g, s.p, mbar_i, &pbar[i]);
  }

  // Compositing: alpha_i shifts every later weight through the
  // transmittance product, handled with a reverse running sum.
  double tail = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const SampleRec& s = node.samples[i];
    const double corr = tail == 0.0 ? 0.0 : tail / s.passed;
    const double alphabar = wbar[i] * s.transmittance - corr;
    tail += wbar[i] * s.w;
    const double sigmabar = alphabar * s.delta * s.passed;
    if (sigmabar != 0.0) backward_density(field, g, s.p, sigmabar, &pbar[i]);
  }

  for (int i = 0; i < n; ++i) {
    const Vec3& pb = pbar[i];
    if (pb.x == 0.0 && pb.y == 0.0 && pb.z == 0.0) continue;
    obar += pb;
    dbar += pb * node.samples[i].t;
  }

  if (origin_bar) *origin_bar = obar;
  if (dir_bar) *dir_bar = dbar;
}

}  // namespace mirrorfield
