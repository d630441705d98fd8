// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/field.hpp"

#include <algorithm>
#include <cmath>

namespace mirrorfield {

double Lattice::min_cell_size() const {
  const Vec3 ext = bbox.extent();
  const double cx = ext.x / (nx - 1);
  const double cy = ext.y / (ny - 1);
  const double cz = ext.z / (nz - 1);
  return std::min({cx, cy, cz});
}

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GridCoord locate(const Lattice& lat, const Vec3& p) {
  if (!finite(p)) throw Error("non-finite query point");
  GridCoord gc;
  gc.inside = lat.bbox.contains(p);

  const Vec3 ext = lat.bbox.extent();
  const double sx = (lat.nx - 1) / ext.x;
  const double sy = (lat.ny - 1) / ext.y;
  const double sz = (lat.nz - 1) / ext.z;
  double ux = (p.x - lat.bbox.min.x) * sx;
  double uy = (p.y - lat.bbox.min.y) * sy;
  double uz = (p.z - lat.bbox.min.z) * sz;
  ux = std::clamp(ux, 0.0, static_cast<double>(lat.nx - 1));
  uy = std::clamp(uy, 0.0, static_cast<double>(lat.ny - 1));
  uz = std::clamp(uz, 0.0, static_cast<double>(lat.nz - 1));

  const int ix = std::min(static_cast<int>(ux), lat.nx - 2);
  const int iy = std::min(static_cast<int>(uy), lat.ny - 2);
  const int iz = std::min(static_cast<int>(uz), lat.nz - 2);
  const double fx = ux - ix, fy = uy - iy, fz = uz - iz;

  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  const double wz[2] = {1.0 - fz, fz};
  const double gx[2] = {-1.0, 1.0};

  const std::size_t base = lat.node_index(ix, iy, iz);
  const std::size_t dx = 1;
  const std::size_t dy = static_cast<std::size_t>(lat.nx);
  const std::size_t dz = static_cast<std::size_t>(lat.nx) * lat.ny;

  int k = 0;
  for (int c = 0; c < 2; ++c) {
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a, ++k) {
        gc.corner[k] = base + a * dx + b * dy + c * dz;
        gc.w[k] = wx[a] * wy[b] * wz[c];
        if (gc.inside) {
          gc.dwdp[0][k] = gx[a] * wy[b] * wz[c] * sx;
          gc.dwdp[1][k] = wx[a] * gx[b] * wz[c] * sy;
          gc.dwdp[2][k] = wx[a] * wy[b] * gx[c] * sz;
        } else {
          gc.dwdp[0][k] = gc.dwdp[1][k] = gc.dwdp[2][k] = 0.0;
        }
      }
    }
  }
  return gc;
}

void gather(const Lattice& lat, const GridCoord& gc, double* out) {
  const int C = lat.channels;
  for (int c = 0; c < C; ++c) out[c] = 0.0;
  for (int k = 0; k < 8; ++k) {
    const float* row = lat.data.data() + gc.corner[k] * C;
    const double w = gc.w[k];
    for (int c = 0; c < C; ++c) out[c] += w * row[c];
  }
}

void scatter(std::vector<double>& grad, const Lattice& lat, const GridCoord& gc,
             const double* gin) {
  const int C = lat.channels;
  for (int k = 0; k < 8; ++k) {
    double* row = grad.data() + gc.corner[k] * C;
    const double w = gc.w[k];
    for (int c = 0; c < C; ++c) row[c] += w * gin[c];
  }
}

Vec3 gather_pos_gradient(const Lattice& lat, const GridCoord& gc, const double* gout) {
  const int C = lat.channels;
  Vec3 g{0, 0, 0};
  for (int k = 0; k < 8; ++k) {
    const float* row = lat.data.data() + gc.corner[k] * C;
    double s = 0.0;
    for (int c = 0; c < C; ++c) s += gout[c] * row[c];
    g.x += s * gc.dwdp[0][k];
    g.y += s * gc.dwdp[1][k];
    g.z += s * gc.dwdp[2][k];
  }
  return g;
}

FieldParams make_field(const Aabb& bbox, int resolution, int sh_degree) {
  if (!(bbox.min.x < bbox.max.x && bbox.min.y < bbox.max.y && bbox.min.z < bbox.max.z))
    throw ShapeError("degenerate bbox");
  if (sh_degree < 0 || sh_degree > 2) throw ConfigError("sh degree must be 0..2");
  const int nb = (sh_degree + 1) * (sh_degree + 1);

  FieldParams f;
  f.sh_degree = sh_degree;
  f.density = Lattice(resolution, 1, bbox);
  f.sh = Lattice(resolution, 3 * nb, bbox);
  f.normal = Lattice(resolution, 3, bbox);
  f.reflprob = Lattice(resolution, 1, bbox);

  f.density.fill(-3.0f);
  f.sh.fill(0.0f);
  for (std::size_t i = 0; i < f.normal.node_count(); ++i) {
    f.normal.data[i * 3 + 0] = 0.0f;
    f.normal.data[i * 3 + 1] = 0.0f;
    f.normal.data[i * 3 + 2] = 1.0f;
  }
  f.reflprob.fill(-4.0f);
  return f;
}

void GradientBuffers::clear() {
  std::fill(density.begin(), density.end(), 0.0);
  std::fill(sh.begin(), sh.end(), 0.0);
  std::fill(normal.begin(), normal.end(), 0.0);
  std::fill(reflprob.begin(), reflprob.end(), 0.0);
}

void GradientBuffers::add(const GradientBuffers& o) {
  if (density.size() != o.density.size() || sh.size() != o.sh.size() ||
      normal.size() != o.normal.size() || reflprob.size() != o.reflprob.size())
    throw ShapeError("gradient buffer shape mismatch");
  for (std::size_t i = 0; i < density.size(); ++i) density[i] += o.density[i];
  for (std::size_t i = 0; i < sh.size(); ++i) sh[i] += o.sh[i];
  for (std::size_t i = 0; i < normal.size(); ++i) normal[i] += o.normal[i];
  for (std::size_t i = 0; i < reflprob.size(); ++i) reflprob[i] += o.reflprob[i];
}

double query_density(const FieldParams& f, const Vec3& x) {
  if (!finite(x)) throw Error("non-finite query point");
  if (!f.density.bbox.contains(x)) return 0.0;
  const GridCoord gc = locate(f.density, x);
  double raw;
  gather(f.density, gc, &raw);
  return softplus(raw);
}

Vec3 query_radiance(const FieldParams& f, const Vec3& x, const Vec3& d) {
  if (std::abs(norm(d) - 1.0) > 1e-6) throw Error("direction must be unit length");
  const int nb = (f.sh_degree + 1) * (f.sh_degree + 1);
  double basis[kShCount];
  sh_basis(d, basis);
  const GridCoord gc = locate(f.sh, x);
  double coeff[3 * kShCount];
  gather(f.sh, gc, coeff);
  Vec3 out;
  for (int ch = 0; ch < 3; ++ch) {
    double s = 0.0;
    for (int k = 0; k < nb; ++k) s += coeff[ch * nb + k] * basis[k];
    out[ch] = sigmoid(s);
  }
  return out;
}

Vec3 query_normal_raw(const FieldParams& f, const Vec3& x) {
  const GridCoord gc = locate(f.normal, x);
  double v[3];
  gather(f.normal, gc, v);
  return {v[0], v[1], v[2]};
}

Vec3 query_normal(const FieldParams& f, const Vec3& x) {
  const Vec3 v = query_normal_raw(f, x);
  const double len = norm(v);
  if (len < 1e-8) throw DegenerateNormalError("interpolated raw normal is ~0");
  return v / len;
}

double query_reflection_prob(const FieldParams& f, const Vec3& x) {
  if (!finite(x)) throw Error("non-finite query point");
  if (!f.reflprob.bbox.contains(x)) return 0.0;
  const GridCoord gc = locate(f.reflprob, x);
  double raw;
  gather(f.reflprob, gc, &raw);
  return sigmoid(raw);
}

bool analytical_normal_at(const FieldParams& f, const Vec3& x, Vec3* out, double h) {
  if (h <= 0.0) h = 0.5 * f.density.min_cell_size();
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 hi = x, lo = x;
    hi[a] += h;
    lo[a] -= h;
    g[a] = (query_density(f, hi) - query_density(f, lo)) / (2.0 * h);
  }
  const double len = norm(g);
  if (len < 1e-8) return false;
  *out = g / (-len);
  return true;
}

Vec3 analytical_normal(const FieldParams& f, const Vec3& x, double h) {
  Vec3 n;
  if (!analytical_normal_at(f, x, &n, h))
    throw DegenerateGradientError("density gradient is ~0");
  return n;
}

void backward_density(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                      double cot, Vec3* xbar) {
  if (!f.density.bbox.contains(x)) return;
  const GridCoord gc = locate(f.density, x);
  double raw;
  gather(f.density, gc, &raw);
  const double draw = cot * sigmoid(raw);
  scatter(grad.density, f.density, gc, &draw);
  if (xbar) *xbar += gather_pos_gradient(f.density, gc, &draw);
}

void backward_radiance(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                       const Vec3& d, const Vec3& cot, Vec3* xbar, Vec3* dbar) {
  const int nb = (f.sh_degree + 1) * (f.sh_degree + 1);
  double basis[kShCount];
  Vec3 bgrad[kShCount];
  sh_basis_grad(d, basis, bgrad);

  const GridCoord gc = locate(f.sh, x);
  double coeff[3 * kShCount];
  gather(f.sh, gc, coeff);

  double dcoeff[3 * kShCount];
  for (int ch = 0; ch < 3; ++ch) {
    double s = 0.0;
    for (int k = 0; k < nb; ++k) s += coeff[ch * nb + k] * basis[k];
    const double y = sigmoid(s);
    const double ds = cot[ch] * y * (1.0 - y);
    for (int k = 0; k < nb; ++k) dcoeff[ch * nb + k] = ds * basis[k];
    if (dbar) {
      for (int k = 0; k < nb; ++k) *dbar += bgrad[k] * (ds * coeff[ch * nb + k]);
    }
  }
  scatter(grad.sh, f.sh, gc, dcoeff);
  if (xbar) *xbar += gather_pos_gradient(f.sh, gc, dcoeff);
}

void backward_normal(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                     const Vec3& cot, Vec3* xbar) {
  const GridCoord gc = locate(f.normal, x);
  double v[3];
  gather(f.normal, gc, v);
  const Vec3 raw{v[0], v[1], v[2]};
  const double len = norm(raw);
  if (len < 1e-8) throw DegenerateNormalError("interpolated raw normal is ~0");
  const Vec3 n = raw / len;
  const Vec3 vbar = (cot - n * dot(cot, n)) / len;
  const double g[3] = {vbar.x, vbar.y, vbar.z};
  scatter(grad.normal, f.normal, gc, g);
  if (xbar) *xbar += gather_pos_gradient(f.normal, gc, g);
}

void backward_reflprob(const FieldParams& f, GradientBuffers& grad, const Vec3& x,
                       double cot, Vec3* xbar) {
  if (!f.reflprob.bbox.contains(x)) return;
  const GridCoord gc = locate(f.reflprob, x);
  double raw;
  gather(f.reflprob, gc, &raw);
  const double m = sigmoid(raw);
  const double draw = cot * m * (1.0 - m);
  scatter(grad.reflprob, f.reflprob, gc, &draw);
  if (xbar) *xbar += gather_pos_gradient(f.reflprob, gc, &draw);
}

void accumulate_gradients(const FieldParams& f, GradientBuffers& grad,
                          const QueryRecord& rec, const double* cotangent,
                          int cotangent_len) {
  const bool scalar = rec.kind == QueryRecord::Kind::Density ||
                      rec.kind == QueryRecord::Kind::ReflProb;
  if ((scalar && cotangent_len != 1) || (!scalar && cotangent_len != 3))
    throw ShapeError("cotangent length does not match query output");

  switch (rec.kind) {
    case QueryRecord::Kind::Density:
      backward_density(f, grad, rec.x, cotangent[0]);
      break;
    case QueryRecord::Kind::Radiance:
      backward_radiance(f, grad, rec.x, rec.d,
                        {cotangent[0], cotangent[1], cotangent[2]});
      break;
    case QueryRecord::Kind::Normal:
      backward_normal(f, grad, rec.x, {cotangent[0], cotangent[1], cotangent[2]});
      break;
    case QueryRecord::Kind::ReflProb:
      backward_reflprob(f, grad, rec.x, cotangent[0]);
      break;
  }
}

}  // namespace mirrorfield
