// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "mirrorfield/sh.hpp"
#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Node-centered 3D lattice with C channels per node.  Node (ix,iy,iz) sits
// at bbox.min + (i / (n-1)) * extent per axis, so trilinear interpolation
// spans the whole box.  Storage index: ((iz*ny + iy)*nx + ix)*C + c.
struct Lattice {
  int nx = 0, ny = 0, nz = 0, channels = 0;
  Aabb bbox;
  std::vector<float> data;

  Lattice() = default;
  Lattice(int n, int c, const Aabb& box) : Lattice(n, n, n, c, box) {}
  Lattice(int nx_, int ny_, int nz_, int c, const Aabb& box)
      : nx(nx_), ny(ny_), nz(nz_), channels(c), bbox(box) {
    if (nx < 2 || ny < 2 || nz < 2 || c < 1) throw ShapeError("lattice too small");
    data.assign(size(), 0.0f);
  }

  std::size_t node_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t size() const { return node_count() * channels; }
  std::size_t node_index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  }
  float* node(int ix, int iy, int iz) {
    return data.data() + node_index(ix, iy, iz) * channels;
  }
  const float* node(int ix, int iy, int iz) const {
    return data.data() + node_index(ix, iy, iz) * channels;
  }
  void fill(float v) { data.assign(size(), v); }
  // Smallest node spacing over the three axes.
  double min_cell_size() const;
};

// Interpolation stencil at a world point: the 8 surrounding node indices,
// their trilinear weights, and the weight derivatives with respect to the
// world position.  Points outside the box clamp to the boundary (inside is
// false there and weight derivatives are zeroed).
struct GridCoord {
  bool inside = false;
  std::size_t corner[8];
  double w[8];
  double dwdp[3][8];
};

GridCoord locate(const Lattice& lat, const Vec3& p);

// out[c] = interpolated channel c.  out must hold lat.channels values.
void gather(const Lattice& lat, const GridCoord& gc, double* out);
// Accumulates w * gin into the matching gradient accumulator entries.
void scatter(std::vector<double>& grad, const Lattice& lat, const GridCoord& gc,
             const double* gin);
// Returns d(sum_c gout[c] * interp_c) / d(world position).
Vec3 gather_pos_gradient(const Lattice& lat, const GridCoord& gc, const double* gout);

double softplus(double x);
double sigmoid(double x);

struct FieldParams {
  Lattice density;   // 1 channel, raw pre-softplus
  Lattice sh;        // 3*(degree+1)^2 channels, per-color SH coefficients
  Lattice normal;    // 3 channels, raw pre-normalization
  Lattice reflprob;  // 1 channel, raw logit
  int sh_degree = 2;

  Aabb bbox() const { return density.bbox; }
  std::size_t total_values() const {
    return density.size() + sh.size() + normal.size() + reflprob.size();
  }
};

// Fresh field: near-transparent density, gray view-independent color,
// +z raw normals, reflection probability well below the spawn threshold.
FieldParams make_field(const Aabb& bbox, int resolution, int sh_degree = 2);

struct GradientBuffers {
  std::vector<double> density, sh, normal, reflprob;

  void resize_like(const FieldParams& p) {
    density.assign(p.density.size(), 0.0);
    sh.assign(p.sh.size(), 0.0);
    normal.assign(p.normal.size(), 0.0);
    reflprob.assign(p.reflprob.size(), 0.0);
  }
  void clear();
  void add(const GradientBuffers& o);
};

// Point evaluations.  Density and reflection probability are 0 outside the
// box; radiance and normal clamp to the boundary value there.
double query_density(const FieldParams& f, const Vec3& x);
Vec3 query_radiance(const FieldParams& f, const Vec3& x, const Vec3& d);
Vec3 query_normal(const FieldParams& f, const Vec3& x);     // unit, throws on ~0 raw
Vec3 query_normal_raw(const FieldParams& f, const Vec3& x); // pre-normalization
double query_reflection_prob(const FieldParams& f, const Vec3& x);

// Unit normal from the density gradient, n = -grad sigma / |grad sigma|,
// central differences with step h (default: half the density cell size).
// Returns false when the gradient magnitude is below 1e-8.
bool analytical_normal_at(const FieldParams& f, const Vec3& x, Vec3* out, double h = 0.0);
// Throwing wrapper over analytical_normal_at.
Vec3 analytical_normal(const FieldParams& f, const Vec3& x, double h = 0.0);

// Backward passes for the point evaluations.  Each accumulates the
// parameter-space vector-Jacobian product into grad and, when the out
// pointers are non-null, the position/direction cotangents.  Points outside
// the box contribute nothing (the forward value is constant there).
void backward_density(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                      double cot, Vec3* xbar = nullptr);
void backward_radiance(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                       const Vec3& d, const Vec3& cot, Vec3* xbar = nullptr,
                       Vec3* dbar = nullptr);
void backward_normal(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                     const Vec3& cot, Vec3* xbar = nullptr);
void backward_reflprob(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                       double cot, Vec3* xbar = nullptr);

// Record of one forward query, replayable against accumulate_gradients.
struct QueryRecord {
  enum class Kind { Density, Radiance, Normal, ReflProb } kind;
  Vec3 x;
  Vec3 d;  // Radiance only
};

// cotangent holds 1 value for scalar queries, 3 for vector ones.
void accumulate_gradients(const FieldParams& f, GradientBuffers& grad,
                          const QueryRecord& rec, const double* cotangent,
                          int cotangent_len);

}  // namespace mirrorfield
