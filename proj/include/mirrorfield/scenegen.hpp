// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mirrorfield/camera.hpp"
#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Classical recursive ray tracer over analytic primitives.  It is the source
// of all ground truth: training images, mirror masks, and depth maps.

enum class PrimShape { Sphere, Box, Rectangle };

struct Material {
  Vec3 albedo{0.5, 0.5, 0.5};
  bool mirror = false;
};

struct Primitive {
  PrimShape shape = PrimShape::Sphere;
  Material material;

  // Sphere.
  Vec3 center;
  double radius = 0;

  // Axis-aligned box.
  Vec3 box_min, box_max;

  // Rectangle: center +- hu*u +- hv*v, geometric normal n = u x v.
  Vec3 rect_center, rect_u, rect_v, rect_n;
  double rect_hu = 0, rect_hv = 0;

  std::string name;  // stable identifier for serialization and tests
};

Primitive make_sphere(const Vec3& center, double radius, const Material& mat,
                      std::string name);
Primitive make_box(const Vec3& lo, const Vec3& hi, const Material& mat,
                   std::string name);
Primitive make_rectangle(const Vec3& center, const Vec3& u, const Vec3& v,
                         double hu, double hv, const Material& mat,
                         std::string name);

struct AnalyticScene {
  std::vector<Primitive> primitives;
  Vec3 light_dir{0, 0, 1};  // unit, points toward the light
  Vec3 light_intensity{1, 1, 1};
  Vec3 ambient{0.1, 0.1, 0.1};
  Vec3 background{0, 0, 0};
  int default_depth = 4;
  std::string name;
};

struct OracleHit {
  bool hit = false;
  double t = 0;
  Vec3 point;
  Vec3 normal;  // unit, flipped to face the incoming ray
  int prim = -1;
  bool mirror = false;
};

// Nearest intersection past ray.t_min (t_max is ignored; the oracle has no
// far bound).
OracleHit oracle_intersect(const AnalyticScene& scene, const Ray& ray);

struct OracleSample {
  Vec3 color;
  double t_first = 0;  // 0 when nothing is hit
  bool mirror_flag = false;
  bool hit = false;
};

// Whitted recursion: lambertian hits shade with ambient plus one
// shadow-tested directional light, mirror hits reflect while depth remains
// and show the background once it runs out.  depth < 0 selects the scene
// default.
OracleSample oracle_trace(const AnalyticScene& scene, const Ray& ray,
                          int depth = -1);

// Known scenes: "mirror-box" (five lambertian walls, two interior objects,
// one wall mirror) and "two-mirrors" (same room with a second facing
// mirror).
AnalyticScene builtin_scene(const std::string& name);

std::string scene_to_json(const AnalyticScene& scene);
AnalyticScene scene_from_json(const std::string& text);

}  // namespace mirrorfield
