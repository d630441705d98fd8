// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/scenegen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mirrorfield {

using nlohmann::json;

namespace {
constexpr double kHitEps = 1e-9;      // minimum accepted hit distance
constexpr double kOffsetEps = 1e-6;   // secondary-ray origin lift

void check_color(const Vec3& c, const char* what) {
  if (!(c.x >= 0 && c.y >= 0 && c.z >= 0))
    throw ConfigError(std::string(what) + " must be non-negative");
}
}  // namespace

Primitive make_sphere(const Vec3& center, double radius, const Material& mat,
                      std::string name) {
  if (!(radius > 0)) throw ConfigError("sphere radius must be positive");
  check_color(mat.albedo, "albedo");
  Primitive p;
  p.shape = PrimShape::Sphere;
  p.material = mat;
  p.center = center;
  p.radius = radius;
  p.name = std::move(name);
  return p;
}

Primitive make_box(const Vec3& lo, const Vec3& hi, const Material& mat,
                   std::string name) {
  if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z))
    throw ConfigError("box bounds must satisfy min < max per axis");
  check_color(mat.albedo, "albedo");
  Primitive p;
  p.shape = PrimShape::Box;
  p.material = mat;
  p.box_min = lo;
  p.box_max = hi;
  p.name = std::move(name);
  return p;
}

Primitive make_rectangle(const Vec3& center, const Vec3& u, const Vec3& v,
                         double hu, double hv, const Material& mat,
                         std::string name) {
  if (!(hu > 0 && hv > 0)) throw ConfigError("rectangle half-extents must be positive");
  const double ulen = norm(u), vlen = norm(v);
  if (ulen < 1e-12 || vlen < 1e-12)
    throw ConfigError("rectangle axes must be nonzero");
  check_color(mat.albedo, "albedo");
  Primitive p;
  p.shape = PrimShape::Rectangle;
  p.material = mat;
  p.rect_center = center;
  p.rect_u = u / ulen;
  p.rect_v = v / vlen;
  if (std::abs(dot(p.rect_u, p.rect_v)) > 1e-9)
    throw ConfigError("rectangle axes must be orthogonal");
  p.rect_n = normalized(cross(p.rect_u, p.rect_v));
  p.rect_hu = hu;
  p.rect_hv = hv;
  p.name = std::move(name);
  return p;
}

namespace {

// Each routine returns the nearest t past t_min with the geometric outward
// normal; the caller flips it toward the ray.
bool hit_sphere(const Primitive& p, const Ray& ray, double t_min, double* t,
                Vec3* n) {
  const Vec3 oc = ray.origin - p.center;
  const double b = dot(oc, ray.dir);
  const double disc = b * b - (dot(oc, oc) - p.radius * p.radius);
  if (disc < 0) return false;
  const double s = std::sqrt(disc);
  double tc = -b - s;
  if (tc <= t_min) tc = -b + s;
  if (tc <= t_min) return false;
  *t = tc;
  *n = (ray.origin + ray.dir * tc - p.center) / p.radius;
  return true;
}

bool hit_box(const Primitive& p, const Ray& ray, double t_min, double* t,
             Vec3* n) {
  double t_near = -1e300, t_far = 1e300;
  int axis_near = 0, axis_far = 0;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a], d = ray.dir[a];
    if (d == 0.0) {
      if (o < p.box_min[a] || o > p.box_max[a]) return false;
      continue;
    }
    double t0 = (p.box_min[a] - o) / d;
    double t1 = (p.box_max[a] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = a;
    }
    if (t1 < t_far) {
      t_far = t1;
      axis_far = a;
    }
  }
  if (t_near > t_far || t_far <= t_min) return false;
  const bool entering = t_near > t_min;
  const double tc = entering ? t_near : t_far;
  const int axis = entering ? axis_near : axis_far;
  Vec3 nn{0, 0, 0};
  nn[axis] = entering ? (ray.dir[axis] > 0 ? -1.0 : 1.0)
                      : (ray.dir[axis] > 0 ? 1.0 : -1.0);
  *t = tc;
  *n = nn;
  return true;
}

bool hit_rectangle(const Primitive& p, const Ray& ray, double t_min, double* t,
                   Vec3* n) {
  const double denom = dot(ray.dir, p.rect_n);
  if (std::abs(denom) < 1e-12) return false;
  const double tc = dot(p.rect_center - ray.origin, p.rect_n) / denom;
  if (tc <= t_min) return false;
  const Vec3 local = ray.origin + ray.dir * tc - p.rect_center;
  if (std::abs(dot(local, p.rect_u)) > p.rect_hu) return false;
  if (std::abs(dot(local, p.rect_v)) > p.rect_hv) return false;
  *t = tc;
  *n = p.rect_n;
  return true;
}

Vec3 shade(const AnalyticScene& scene, const OracleHit& hit) {
  const Vec3& albedo = scene.primitives[hit.prim].material.albedo;
  Vec3 c = scene.ambient * albedo;
  const double ndl = dot(hit.normal, scene.light_dir);
  if (ndl > 0) {
    Ray shadow;
    shadow.origin = hit.point + hit.normal * kOffsetEps;
    shadow.dir = scene.light_dir;
    if (!oracle_intersect(scene, shadow).hit)
      c = c + ndl * (albedo * scene.light_intensity);
  }
  return c;
}

}  // namespace

OracleHit oracle_intersect(const AnalyticScene& scene, const Ray& ray) {
  const double t_min = std::max(ray.t_min, kHitEps);
  OracleHit best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& p = scene.primitives[i];
    double t;
    Vec3 n;
    bool ok = false;
    switch (p.shape) {
      case PrimShape::Sphere:
        ok = hit_sphere(p, ray, t_min, &t, &n);
        break;
      case PrimShape::Box:
        ok = hit_box(p, ray, t_min, &t, &n);
        break;
      case PrimShape::Rectangle:
        ok = hit_rectangle(p, ray, t_min, &t, &n);
        break;
    }
    if (!ok || (best.hit && t >= best.t)) continue;
    best.hit = true;
    best.t = t;
    best.point = ray.origin + ray.dir * t;
    best.normal = dot(n, ray.dir) > 0 ? -n : n;
    best.prim = static_cast<int>(i);
    best.mirror = p.material.mirror;
  }
  return best;
}

OracleSample oracle_trace(const AnalyticScene& scene, const Ray& ray, int depth) {
  if (depth < 0) depth = scene.default_depth;
  OracleSample out;
  const OracleHit hit = oracle_intersect(scene, ray);
  if (!hit.hit) {
    out.color = scene.background;
    return out;
  }
  out.hit = true;
  out.t_first = hit.t;
  out.mirror_flag = hit.mirror;
  if (!hit.mirror) {
    out.color = shade(scene, hit);
    return out;
  }
  if (depth == 0) {
    out.color = scene.background;
    return out;
  }
  Ray next;
  next.origin = hit.point + hit.normal * kOffsetEps;
  next.dir = ray.dir - 2.0 * dot(ray.dir, hit.normal) * hit.normal;
  out.color = oracle_trace(scene, next, depth - 1).color;
  return out;
}

AnalyticScene builtin_scene(const std::string& name) {
  if (name != "mirror-box" && name != "two-mirrors")
    throw ConfigError("unknown scene '" + name + "'");

  AnalyticScene s;
  s.name = name;
  s.light_dir = normalized(Vec3{-0.15, 0.1, 0.98});
  s.light_intensity = {0.85, 0.85, 0.85};
  s.ambient = {0.22, 0.22, 0.22};
  s.background = {0, 0, 0};
  s.default_depth = 4;

  // An open-top room: floor plus four walls, all lambertian with distinct
  // albedos so tests can identify what a reflection shows.
  Material floor_m{{0.45, 0.33, 0.22}, false};
  Material red{{0.8, 0.15, 0.15}, false};
  Material green{{0.15, 0.7, 0.2}, false};
  Material blue{{0.2, 0.3, 0.8}, false};
  Material gray{{0.55, 0.55, 0.5}, false};
  Material yellow{{0.85, 0.75, 0.2}, false};
  Material magenta{{0.75, 0.2, 0.65}, false};
  Material mirror_m{{1, 1, 1}, true};

  s.primitives.push_back(make_rectangle({0, 0, -1}, {1, 0, 0}, {0, 1, 0}, 1, 1,
                                        floor_m, "floor"));
  s.primitives.push_back(make_rectangle({-1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 1, 1,
                                        red, "wall-red"));
  s.primitives.push_back(make_rectangle({1, 0, 0}, {0, 0, 1}, {0, 1, 0}, 1, 1,
                                        gray, "wall-gray"));
  s.primitives.push_back(make_rectangle({0, -1, 0}, {0, 0, 1}, {1, 0, 0}, 1, 1,
                                        green, "wall-green"));
  s.primitives.push_back(make_rectangle({0, 1, 0}, {1, 0, 0}, {0, 0, 1}, 1, 1,
                                        blue, "wall-blue"));
  s.primitives.push_back(make_sphere({-0.35, 0.25, -0.7}, 0.28, yellow, "sphere"));
  s.primitives.push_back(
      make_box({0.1, -0.65, -1.0}, {0.5, -0.3, -0.55}, magenta, "block"));
  // Wall mirror just inside the gray wall, facing the room.
  s.primitives.push_back(make_rectangle({0.98, 0, 0.1}, {0, -1, 0}, {0, 0, 1},
                                        0.55, 0.4, mirror_m, "mirror"));
  if (name == "two-mirrors") {
    s.primitives.push_back(make_rectangle({-0.98, 0, 0.1}, {0, 1, 0}, {0, 0, 1},
                                          0.55, 0.4, mirror_m, "mirror-2"));
  }
  return s;
}

namespace {
json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
}  // namespace

std::string scene_to_json(const AnalyticScene& scene) {
  json j;
  j["name"] = scene.name;
  j["light"] = {{"dir", vec_json(scene.light_dir)},
                {"intensity", vec_json(scene.light_intensity)}};
  j["ambient"] = vec_json(scene.ambient);
  j["background"] = vec_json(scene.background);
  j["default_depth"] = scene.default_depth;
  json prims = json::array();
  for (const Primitive& p : scene.primitives) {
    json e;
    e["name"] = p.name;
    e["mirror"] = p.material.mirror;
    e["albedo"] = vec_json(p.material.albedo);
    switch (p.shape) {
      case PrimShape::Sphere:
        e["shape"] = "sphere";
        e["center"] = vec_json(p.center);
        e["radius"] = p.radius;
        break;
      case PrimShape::Box:
        e["shape"] = "box";
        e["min"] = vec_json(p.box_min);
        e["max"] = vec_json(p.box_max);
        break;
      case PrimShape::Rectangle:
        e["shape"] = "rectangle";
        e["center"] = vec_json(p.rect_center);
        e["u"] = vec_json(p.rect_u);
        e["v"] = vec_json(p.rect_v);
        e["hu"] = p.rect_hu;
        e["hv"] = p.rect_hv;
        break;
    }
    prims.push_back(std::move(e));
  }
  j["primitives"] = std::move(prims);
  return j.dump(2) + "\n";
}

AnalyticScene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene parse failure: ") + e.what());
  }
  try {
    AnalyticScene s;
    s.name = j.value("name", std::string());
    s.light_dir = normalized(vec_from(j.at("light").at("dir"), "light.dir"));
    s.light_intensity = vec_from(j.at("light").at("intensity"), "light.intensity");
    s.ambient = vec_from(j.at("ambient"), "ambient");
    s.background = vec_from(j.at("background"), "background");
    s.default_depth = j.value("default_depth", 4);
    check_color(s.light_intensity, "light.intensity");
    check_color(s.ambient, "ambient");
    check_color(s.background, "background");
    for (const json& e : j.at("primitives")) {
      Material m;
      m.albedo = vec_from(e.at("albedo"), "albedo");
      m.mirror = e.value("mirror", false);
      const std::string shape = e.at("shape").get<std::string>();
      const std::string pname = e.value("name", std::string());
      if (shape == "sphere") {
        s.primitives.push_back(make_sphere(vec_from(e.at("center"), "center"),
                                           e.at("radius").get<double>(), m, pname));
      } else if (shape == "box") {
        s.primitives.push_back(make_box(vec_from(e.at("min"), "min"),
                                        vec_from(e.at("max"), "max"), m, pname));
      } else if (shape == "rectangle") {
        s.primitives.push_back(make_rectangle(
            vec_from(e.at("center"), "center"), vec_from(e.at("u"), "u"),
            vec_from(e.at("v"), "v"), e.at("hu").get<double>(),
            e.at("hv").get<double>(), m, pname));
      } else {
        throw ConfigError("unknown primitive shape '" + shape + "'");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene schema failure: ") + e.what());
  }
}

}  // namespace mirrorfield
