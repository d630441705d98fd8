// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mirrorfield/field.hpp"
#include "mirrorfield/render.hpp"
#include "mirrorfield/rng.hpp"
#include "mirrorfield/scenegen.hpp"

namespace mftest {

using namespace mirrorfield;

inline Vec3 node_pos(const Lattice& lat, int ix, int iy, int iz) {
  const Vec3 ext = lat.bbox.max - lat.bbox.min;
  return {lat.bbox.min.x + ext.x * ix / (lat.nx - 1),
          lat.bbox.min.y + ext.y * iy / (lat.ny - 1),
          lat.bbox.min.z + ext.z * iz / (lat.nz - 1)};
}

inline void fill_random(Lattice& lat, Rng rng, double lo, double hi) {
  for (auto& v : lat.data) v = static_cast<float>(rng.uniform(lo, hi));
}

// Field with bounded random raw values on every lattice.  Density raw in
// [d_lo, d_hi], SH coefficients in [-0.8, 0.8], normals away from zero,
// reflection logits in [r_lo, r_hi].
inline FieldParams random_field(int res, const Aabb& box, std::uint64_t seed,
                                double d_lo = -1.0, double d_hi = 1.5,
                                double r_lo = -4.0, double r_hi = -1.0) {
  FieldParams f = make_field(box, res, 2);
  Rng rng(seed);
  fill_random(f.density, rng.fork(1), d_lo, d_hi);
  fill_random(f.sh, rng.fork(2), -0.8, 0.8);
  fill_random(f.reflprob, rng.fork(4), r_lo, r_hi);
  Rng nr = rng.fork(3);
  for (std::size_t i = 0; i + 2 < f.normal.data.size(); i += 3) {
    Vec3 n{nr.uniform(-1, 1), nr.uniform(-1, 1), nr.uniform(-1, 1)};
    if (norm(n) < 0.3) n = n + Vec3{0.5, 0.4, 0.6};
    f.normal.data[i] = static_cast<float>(n.x);
    f.normal.data[i + 1] = static_cast<float>(n.y);
    f.normal.data[i + 2] = static_cast<float>(n.z);
  }
  return f;
}

// Overwrites the given channels at every node whose position satisfies pred.
template <typename Pred>
inline void paint(Lattice& lat, Pred pred, const float* values, int first_channel,
                  int count) {
  for (int iz = 0; iz < lat.nz; ++iz)
    for (int iy = 0; iy < lat.ny; ++iy)
      for (int ix = 0; ix < lat.nx; ++ix) {
        if (!pred(node_pos(lat, ix, iy, iz))) continue;
        float* n = lat.node(ix, iy, iz);
        for (int c = 0; c < count; ++c) n[first_channel + c] = values[c];
      }
}

template <typename Pred>
inline void paint1(Lattice& lat, Pred pred, float value, int channel = 0) {
  paint(lat, pred, &value, channel, 1);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Sets the view-independent color of matching nodes: the constant basis
// coefficient is chosen so the activated radiance equals rgb there.
template <typename Pred>
inline void paint_color(Lattice& sh, Pred pred, const Vec3& rgb) {
  const int nb = sh.channels / 3;
  for (int iz = 0; iz < sh.nz; ++iz)
    for (int iy = 0; iy < sh.ny; ++iy)
      for (int ix = 0; ix < sh.nx; ++ix) {
        if (!pred(node_pos(sh, ix, iy, iz))) continue;
        float* n = sh.node(ix, iy, iz);
        for (int ch = 0; ch < 3; ++ch) {
          for (int k = 0; k < nb; ++k) n[ch * nb + k] = 0.0f;
          n[ch * nb] = static_cast<float>(logit(rgb[ch]) / 0.28209479177387814);
        }
      }
}

// Unsigned distance from p to a primitive's surface plus the outward
// direction at the closest point.  Rectangles are treated as thin plates.
inline double prim_distance(const Primitive& pr, const Vec3& p, Vec3* outward) {
  switch (pr.shape) {
    case PrimShape::Sphere: {
      Vec3 rel = p - pr.center;
      double r = norm(rel);
      *outward = r > 1e-12 ? rel / r : Vec3{0, 0, 1};
      return std::abs(r - pr.radius);
    }
    case PrimShape::Box: {
      Vec3 q{std::clamp(p.x, pr.box_min.x, pr.box_max.x),
             std::clamp(p.y, pr.box_min.y, pr.box_max.y),
             std::clamp(p.z, pr.box_min.z, pr.box_max.z)};
      Vec3 rel = p - q;
      double outside = norm(rel);
      if (outside > 1e-12) {
        *outward = rel / outside;
        return outside;
      }
      double best = 1e30;
      *outward = {1, 0, 0};
      for (int a = 0; a < 3; ++a) {
        double lo = p[a] - pr.box_min[a], hi = pr.box_max[a] - p[a];
        Vec3 axis{0, 0, 0};
        if (lo < best) {
          best = lo;
          axis[a] = -1;
          *outward = axis;
        }
        if (hi < best) {
          best = hi;
          axis = {0, 0, 0};
          axis[a] = 1;
          *outward = axis;
        }
      }
      return best;
    }
    case PrimShape::Rectangle: {
      Vec3 rel = p - pr.rect_center;
      double a = std::clamp(dot(rel, pr.rect_u), -pr.rect_hu, pr.rect_hu);
      double b = std::clamp(dot(rel, pr.rect_v), -pr.rect_hv, pr.rect_hv);
      double h = dot(rel, pr.rect_n);
      Vec3 q = pr.rect_center + a * pr.rect_u + b * pr.rect_v;
      *outward = h >= 0 ? pr.rect_n : -pr.rect_n;
      return norm(p - q);
    }
  }
  *outward = {0, 0, 1};
  return 1e30;
}

// Converts an analytic scene into lattices directly: thin dense shells at
// primitive surfaces, statically shaded colors, outward normals, and a high
// reflection logit on mirror shells.  No optimization involved; this gives
// renderer tests a field with known geometry.
inline FieldParams bake_field(const AnalyticScene& scene, int res, const Aabb& box) {
  FieldParams f = make_field(box, res, 2);
  f.density.fill(-15.0f);
  const double cell = f.density.min_cell_size();
  const double shell = 0.8 * cell;
  const int nb = f.sh.channels / 3;
  for (int iz = 0; iz < res; ++iz)
    for (int iy = 0; iy < res; ++iy)
      for (int ix = 0; ix < res; ++ix) {
        const Vec3 p = node_pos(f.density, ix, iy, iz);
        double best = 1e30;
        Vec3 best_out{0, 0, 1};
        const Primitive* best_prim = nullptr;
        for (const auto& pr : scene.primitives) {
          Vec3 out;
          double d = prim_distance(pr, p, &out);
          if (d < best) {
            best = d;
            best_out = out;
            best_prim = &pr;
          }
        }
        if (!best_prim || best > shell) continue;
        const Vec3& albedo = best_prim->material.albedo;
        double ndl = std::max(0.0, dot(best_out, scene.light_dir));
        Vec3 shade = scene.ambient * albedo + ndl * albedo * scene.light_intensity;
        float* dn = f.density.node(ix, iy, iz);
        dn[0] = 50.0f;
        float* sn = f.sh.node(ix, iy, iz);
        for (int ch = 0; ch < 3; ++ch) {
          double v = std::clamp(shade[ch], 0.02, 0.98);
          sn[ch * nb] = static_cast<float>(logit(v) / 0.28209479177387814);
        }
        float* nn = f.normal.node(ix, iy, iz);
        nn[0] = static_cast<float>(5 * best_out.x);
        nn[1] = static_cast<float>(5 * best_out.y);
        nn[2] = static_cast<float>(5 * best_out.z);
        f.reflprob.node(ix, iy, iz)[0] = best_prim->material.mirror ? 12.0f : -12.0f;
      }
  return f;
}

}  // namespace mftest
