// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace mirrorfield {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator*(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double norm2(const Vec3& v) { return dot(v, v); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
inline Vec3 cwise_min(const Vec3& a, const Vec3& b) {
  return {std::fmin(a.x, b.x), std::fmin(a.y, b.y), std::fmin(a.z, b.z)};
}
inline Vec3 cwise_max(const Vec3& a, const Vec3& b) {
  return {std::fmax(a.x, b.x), std::fmax(a.y, b.y), std::fmax(a.z, b.z)};
}
inline Vec3 clamp01(const Vec3& v) {
  auto c = [](double t) { return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t); };
  return {c(v.x), c(v.y), c(v.z)};
}

// Column-major 3x3 rotation / linear map.
struct Mat3 {
  // m[c] is column c.
  Vec3 col[3];

  static Mat3 identity() {
    Mat3 m;
    m.col[0] = {1, 0, 0};
    m.col[1] = {0, 1, 0};
    m.col[2] = {0, 0, 1};
    return m;
  }
  static Mat3 from_columns(const Vec3& a, const Vec3& b, const Vec3& c) {
    Mat3 m;
    m.col[0] = a; m.col[1] = b; m.col[2] = c;
    return m;
  }

  Vec3 operator*(const Vec3& v) const {
    return col[0] * v.x + col[1] * v.y + col[2] * v.z;
  }
  Mat3 operator*(const Mat3& o) const {
    return from_columns(*this * o.col[0], *this * o.col[1], *this * o.col[2]);
  }
  Mat3 transposed() const {
    Mat3 m;
    m.col[0] = {col[0].x, col[1].x, col[2].x};
    m.col[1] = {col[0].y, col[1].y, col[2].y};
    m.col[2] = {col[0].z, col[1].z, col[2].z};
    return m;
  }
  double det() const { return dot(col[0], cross(col[1], col[2])); }
};

// Rigid map p -> R p + t.
struct RigidTransform {
  Mat3 rot = Mat3::identity();
  Vec3 trans{0, 0, 0};

  Vec3 apply_point(const Vec3& p) const { return rot * p + trans; }
  Vec3 apply_dir(const Vec3& d) const { return rot * d; }
  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rot = rot.transposed();
    inv.trans = -(inv.rot * trans);
    return inv;
  }
  bool is_identity() const {
    const Mat3 i = Mat3::identity();
    for (int c = 0; c < 3; ++c)
      if (!(rot.col[c] == i.col[c])) return false;
    return trans == Vec3{0, 0, 0};
  }
};

struct Aabb {
  Vec3 min{0, 0, 0};
  Vec3 max{0, 0, 0};

  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return norm(extent()); }
};

// Ray/box slab test; returns false when the intersection interval is empty.
inline bool intersect_aabb(const Aabb& box, const Vec3& origin, const Vec3& dir,
                           double& t_enter, double& t_exit) {
  double t0 = -INFINITY, t1 = INFINITY;
  for (int a = 0; a < 3; ++a) {
    const double o = origin[a], d = dir[a];
    if (d == 0.0) {
      if (o < box.min[a] || o > box.max[a]) return false;
      continue;
    }
    double ta = (box.min[a] - o) / d;
    double tb = (box.max[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::fmax(t0, ta);
    t1 = std::fmin(t1, tb);
  }
  if (t0 > t1) return false;
  t_enter = t0;
  t_exit = t1;
  return true;
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateNormalError : Error {
  using Error::Error;
};
struct DegenerateGradientError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace mirrorfield
