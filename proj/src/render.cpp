// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/render.hpp"

#include <algorithm>
#include <cmath>

#include "mirrorfield/threading.hpp"

namespace mirrorfield {

namespace {

// A sample whose raw normal is ~0 aborts the render only above this weight;
// below it the sample simply contributes nothing to the normal sum.
constexpr double kDegenerateWeight = 1e-4;
constexpr std::uint64_t kRoughTag = 0x726f756768ull;

}  // namespace

ComposedScene single_field_scene(const FieldParams& f) {
  ComposedScene scene;
  ComposedEntry e;
  e.kind = ComposedEntry::Kind::LearnedField;
  e.field = &f;
  scene.entries.push_back(e);
  return scene;
}

SampleSet samples_from_jitter(double t_min, double t_max, int n, const double* u) {
  SampleSet s;
  s.t.resize(n);
  s.delta.resize(n);
  const double range = t_max - t_min;
  for (int i = 0; i < n; ++i) s.t[i] = t_min + (i + u[i]) / n * range;
  for (int i = 0; i + 1 < n; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
  s.delta[n - 1] = range / n;
  return s;
}

SampleSet stratified_samples(const Ray& ray, int n, Rng& rng) {
  if (n < 2) throw ConfigError("need at least two samples");
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = rng.uniform();
  return samples_from_jitter(ray.t_min, ray.t_max, n, u.data());
}

void compute_weights(const std::vector<double>& sigma,
                     const std::vector<double>& delta,
                     std::vector<double>* weights, double* opacity) {
  if (sigma.size() != delta.size()) throw ShapeError("sigma/delta length mismatch");
  weights->resize(sigma.size());
  double transmittance = 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0.0) throw Error("negative density");
    if (delta[i] <= 0.0) throw Error("non-positive spacing");
    const double passed = std::exp(-sigma[i] * delta[i]);
    const double w = transmittance * (1.0 - passed);
    (*weights)[i] = w;
    total += w;
    transmittance *= passed;
  }
  *opacity = total;
}

Vec3 composite(const std::vector<double>& sigma, const std::vector<Vec3>& value,
               const std::vector<double>& delta, std::vector<double>* weights,
               double* opacity) {
  if (sigma.size() != value.size()) throw ShapeError("sigma/value length mismatch");
  std::vector<double> w_local;
  std::vector<double>* w = weights ? weights : &w_local;
  double op;
  compute_weights(sigma, delta, w, &op);
  Vec3 out{0, 0, 0};
  for (std::size_t i = 0; i < value.size(); ++i) out += value[i] * (*w)[i];
  if (opacity) *opacity = op;
  return out;
}

double composite(const std::vector<double>& sigma, const std::vector<double>& value,
                 const std::vector<double>& delta, std::vector<double>* weights,
                 double* opacity) {
  if (sigma.size() != value.size()) throw ShapeError("sigma/value length mismatch");
  std::vector<double> w_local;
  std::vector<double>* w = weights ? weights : &w_local;
  double op;
  compute_weights(sigma, delta, w, &op);
  double out = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) out += value[i] * (*w)[i];
  if (opacity) *opacity = op;
  return out;
}

namespace detail {

// March result plus the clipped sample span (needed for the reflected-ray
// start offset).
struct PrimaryResult {
  RayRadiometry rad;
  double lo = 0.0, hi = 0.0;
  bool empty = true;
};

// Volume-renders one ray against one field using caller-supplied jitter.
// Camera rays (bounce 0) clip their sample span to the field bounds; their
// origin and direction are constants, so the clip bounds are too.  Reflected
// rays keep their full span because their geometry depends on learned
// parameters and the clip would not be differentiable.
PrimaryResult march_primary(const FieldParams& field, const Ray& ray, int n,
                            const double* u, const TraceParams& params) {
  PrimaryResult res;
  double lo = ray.t_min, hi = ray.t_max;
  if (ray.bounce == 0) {
    double te, tx;
    if (!intersect_aabb(field.bbox(), ray.origin, ray.dir, te, tx)) return res;
    lo = std::max(lo, te);
    hi = std::min(hi, tx);
  }
  if (lo >= hi) return res;
  res.empty = false;
  res.lo = lo;
  res.hi = hi;

  const SampleSet s = samples_from_jitter(lo, hi, n, u);
  RayRadiometry& rad = res.rad;
  double transmittance = 1.0;
  double sum_wt = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 p = ray.origin + ray.dir * s.t[i];
    const double sigma = query_density(field, p);
    const double passed = std::exp(-sigma * s.delta[i]);
    const double w = transmittance * (1.0 - passed);
    if (w >= params.skip_eps && w > 0.0) {
      rad.color += query_radiance(field, p, ray.dir) * w;
      const Vec3 nraw = query_normal_raw(field, p);
      const double nlen = norm(nraw);
      if (nlen < 1e-8) {
        if (w > kDegenerateWeight)
          throw DegenerateNormalError("degenerate normal at high-weight sample");
      } else {
        rad.normal += nraw * (w / nlen);
      }
      rad.reflprob += query_reflection_prob(field, p) * w;
      rad.opacity += w;
      sum_wt += w * s.t[i];
    }
    transmittance *= passed;
    if (transmittance < params.term_eps) break;
  }
  rad.depth = rad.opacity > 0.0 ? sum_wt / rad.opacity : 0.0;
  return res;
}

}  // namespace detail

RayRadiometry render_primary(const FieldParams& field, const Ray& ray, int n,
                             Rng& rng, const TraceParams& params) {
  if (n < 2) throw ConfigError("need at least two samples");
  Rng stream = rng.fork(static_cast<std::uint64_t>(ray.bounce));
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = stream.uniform();
  return detail::march_primary(field, ray, n, u.data(), params).rad;
}

Vec3 reflect_dir(const Vec3& d, const Vec3& n) {
  if (std::abs(norm(d) - 1.0) > 1e-6 || std::abs(norm(n) - 1.0) > 1e-6)
    throw Error("reflect_dir expects unit vectors");
  const Vec3 h = d - n * (2.0 * dot(d, n));
  return normalized(h);
}

Ray spawn_reflected(const Ray& ray, const RayRadiometry& rad, double epsilon) {
  const double nlen = norm(rad.normal);
  if (nlen < 1e-6) throw DegenerateNormalError("accumulated normal is ~0");
  Ray child;
  child.origin = ray.origin + ray.dir * rad.depth;
  child.dir = reflect_dir(ray.dir, rad.normal / nlen);
  child.bounce = ray.bounce + 1;
  child.t_min = epsilon;
  child.t_max = ray.t_max;
  return child;
}

std::optional<std::pair<double, Vec3>> intersect_virtual_mirror(
    const Ray& ray, const VirtualMirror& mirror) {
  const double denom = dot(ray.dir, mirror.n);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = dot(mirror.center - ray.origin, mirror.n) / denom;
  if (t <= ray.t_min) return std::nullopt;
  const Vec3 q = ray.origin + ray.dir * t - mirror.center;
  if (std::abs(dot(q, mirror.u)) > mirror.hu) return std::nullopt;
  if (std::abs(dot(q, mirror.v)) > mirror.hv) return std::nullopt;
  const Vec3 facing = denom < 0.0 ? mirror.n : -mirror.n;
  return std::make_pair(t, facing);
}

namespace {

struct RoughSpec {
  double kappa = 0.0;
  Rng base{0};
  bool active = false;
};

Vec3 trace_impl(const ComposedScene& scene, const Ray& ray, int max_depth, int n,
                const Rng& ray_rng, const TraceParams& params, RoughSpec* rough,
                RayRadiometry* out_rad) {
  if (scene.entries.empty()) throw ConfigError("scene has no entries");

  // One jitter vector per bounce, shared by every entry, so a composition
  // with a single entry marches exactly like the plain trace.
  Rng stream = ray_rng.fork(static_cast<std::uint64_t>(ray.bounce));
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = stream.uniform();

  struct Evaluated {
    bool is_mirror = false;
    detail::PrimaryResult primary;
    double mirror_t = 0.0;
    Vec3 mirror_normal;  // entry frame, facing the ray
    bool mirror_hit = false;
  };
  std::vector<Evaluated> evals(scene.entries.size());

  int winner = -1;
  double winner_depth = INFINITY;
  int fallback = -1;
  double fallback_opacity = -1.0;
  for (std::size_t e = 0; e < scene.entries.size(); ++e) {
    const ComposedEntry& entry = scene.entries[e];
    Ray local = ray;
    local.origin = entry.world_to_entry.apply_point(ray.origin);
    local.dir = entry.world_to_entry.apply_dir(ray.dir);
    Evaluated& ev = evals[e];
    if (entry.kind == ComposedEntry::Kind::LearnedField) {
      ev.primary = detail::march_primary(*entry.field, local, n, u.data(), params);
      const double op = ev.primary.rad.opacity;
      if (op > fallback_opacity) {
        fallback_opacity = op;
        fallback = static_cast<int>(e);
      }
      if (op > params.occlusion_threshold &&
          ev.primary.rad.depth < winner_depth) {
        winner_depth = ev.primary.rad.depth;
        winner = static_cast<int>(e);
      }
    } else {
      ev.is_mirror = true;
      const auto hit = intersect_virtual_mirror(local, entry.mirror);
      if (hit) {
        ev.mirror_hit = true;
        ev.mirror_t = hit->first;
        ev.mirror_normal = hit->second;
        if (hit->first < winner_depth) {
          winner_depth = hit->first;
          winner = static_cast<int>(e);
        }
      }
    }
  }
  if (winner < 0) winner = fallback;
  if (winner < 0) {
    // Mirrors only and none was hit.
    if (out_rad) *out_rad = RayRadiometry{};
    return {0, 0, 0};
  }

  const ComposedEntry& went = scene.entries[winner];
  const Mat3 entry_to_world = went.world_to_entry.rot.transposed();
  const Evaluated& ev = evals[winner];

  auto perturb = [&](Vec3 nu) {
    if (rough && rough->active && rough->kappa > 0.0) {
      Rng g = rough->base.fork(static_cast<std::uint64_t>(ray.bounce));
      nu = nu + g.gaussian3() * rough->kappa;
      const double len = norm(nu);
      if (len < 1e-9) return Vec3{0, 0, 1};
      nu = nu / len;
    }
    return nu;
  };

  auto recurse = [&](Ray child) -> Vec3 {
    if (scene.substitution) {
      child.origin = scene.substitution->portal.apply_point(child.origin);
      child.dir = scene.substitution->portal.apply_dir(child.dir);
      const ComposedScene target = single_field_scene(*scene.substitution->target);
      return trace_impl(target, child, max_depth, n, ray_rng, params, rough, nullptr);
    }
    return trace_impl(scene, child, max_depth, n, ray_rng, params, rough, nullptr);
  };

  if (!ev.is_mirror) {
    const RayRadiometry& rad = ev.primary.rad;
    if (out_rad) {
      *out_rad = rad;
      out_rad->normal = entry_to_world * rad.normal;
    }
    const bool spawn = ray.bounce < max_depth && rad.reflprob > params.tau &&
                       norm(rad.normal) >= 1e-6;
    if (!spawn || ev.primary.empty) return rad.color;

    Vec3 nu = perturb(entry_to_world * normalized(rad.normal));
    Ray child;
    child.origin = ray.origin + ray.dir * rad.depth;
    child.dir = reflect_dir(ray.dir, nu);
    child.bounce = ray.bounce + 1;
    child.t_min = params.epsilon > 0.0
                      ? params.epsilon
                      : 2.0 * (ev.primary.hi - ev.primary.lo) / n;
    child.t_max = params.child_t_max > 0.0 ? params.child_t_max : ray.t_max;
    const Vec3 reflected = recurse(child);
    const double m = rad.reflprob;
    return rad.color * (1.0 - m) + reflected * m;
  }

  // Virtual mirror: a perfect reflector with no emission of its own.
  if (out_rad) {
    *out_rad = RayRadiometry{};
    out_rad->depth = ev.mirror_t;
    out_rad->opacity = 1.0;
    out_rad->reflprob = 1.0;
    out_rad->normal = entry_to_world * ev.mirror_normal;
  }
  if (ray.bounce >= max_depth) return {0, 0, 0};
  Vec3 nu = perturb(entry_to_world * ev.mirror_normal);
  Ray child;
  child.origin = ray.origin + ray.dir * ev.mirror_t;
  child.dir = reflect_dir(ray.dir, nu);
  child.bounce = ray.bounce + 1;
  child.t_min = params.epsilon > 0.0 ? params.epsilon
                                     : 2.0 * (ray.t_max - ray.t_min) / n;
  child.t_max = params.child_t_max > 0.0 ? params.child_t_max : ray.t_max;
  return recurse(child);
}

}  // namespace

Vec3 trace(const ComposedScene& scene, const Ray& ray, int max_depth, int n,
           Rng& rng, const TraceParams& params) {
  if (max_depth < 0) throw ConfigError("max_depth must be nonnegative");
  if (n < 2) throw ConfigError("need at least two samples");
  return trace_impl(scene, ray, max_depth, n, rng, params, nullptr, nullptr);
}

Vec3 trace_composed(const ComposedScene& scene, const Ray& ray, int max_depth,
                    int n, Rng& rng, const TraceParams& params) {
  return trace(scene, ray, max_depth, n, rng, params);
}

Vec3 trace_substituted(const ComposedScene& scene, const Ray& ray, int max_depth,
                       int n, Rng& rng, const TraceParams& params) {
  if (!scene.substitution || !scene.substitution->target)
    throw ConfigError("substitution not configured");
  return trace(scene, ray, max_depth, n, rng, params);
}

Vec3 trace_rough(const ComposedScene& scene, const Ray& ray, int max_depth, int n,
                 int k_samples, double kappa, Rng& rng,
                 const TraceParams& params) {
  if (k_samples < 1) throw ConfigError("need at least one roughness sample");
  if (kappa < 0.0) throw ConfigError("kappa must be nonnegative");
  if (kappa == 0.0) return trace(scene, ray, max_depth, n, rng, params);

  Vec3 sum{0, 0, 0};
  for (int k = 0; k < k_samples; ++k) {
    // Each evaluation gets independent jitter and perturbation streams so
    // the estimates average with the usual 1/K variance.
    Rng eval_rng = rng.fork(kRoughTag + static_cast<std::uint64_t>(k));
    RoughSpec rough;
    rough.kappa = kappa;
    rough.base = eval_rng.fork(1);
    rough.active = true;
    sum += trace_impl(scene, ray, max_depth, n, eval_rng, params, &rough, nullptr);
  }
  return sum / static_cast<double>(k_samples);
}

RenderOutputs render_image(const ComposedScene& scene, const Camera& cam,
                           const RenderConfig& cfg) {
  RenderOutputs out;
  out.color = Image(cam.width, cam.height, 3);
  out.depth = Image(cam.width, cam.height, 1);
  out.opacity = Image(cam.width, cam.height, 1);
  out.reflprob = Image(cam.width, cam.height, 1);
  out.normal = Image(cam.width, cam.height, 3);

  const std::size_t n_pixels = out.color.pixel_count();
  std::vector<std::string> errors(worker_count());
  std::vector<int> error_counts(worker_count(), 0);

  parallel_for(0, n_pixels, [&](int worker, std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int row = static_cast<int>(idx) / cam.width;
      const int col = static_cast<int>(idx) % cam.width;
      Rng ray_rng = Rng(cfg.seed).fork(idx);
      try {
        const Ray ray = pixel_ray(cam, row, col, cfg.t_min, cfg.t_max);
        Vec3 color;
        RayRadiometry rad;
        if (cfg.rough_samples > 0 && cfg.rough_kappa > 0.0) {
          // Aux buffers for rough renders come from the first evaluation.
          Rng eval0 = ray_rng.fork(kRoughTag);
          RoughSpec rough;
          rough.kappa = cfg.rough_kappa;
          rough.base = eval0.fork(1);
          rough.active = true;
          trace_impl(scene, ray, cfg.max_depth, cfg.n_samples, eval0, cfg.trace,
                     &rough, &rad);
          color = trace_rough(scene, ray, cfg.max_depth, cfg.n_samples,
                              cfg.rough_samples, cfg.rough_kappa, ray_rng,
                              cfg.trace);
        } else {
          color = trace_impl(scene, ray, cfg.max_depth, cfg.n_samples, ray_rng,
                             cfg.trace, nullptr, &rad);
        }
        out.color.set_rgb(row, col, color);
        out.depth.at(row, col, 0) = static_cast<float>(rad.depth);
        out.opacity.at(row, col, 0) = static_cast<float>(rad.opacity);
        out.reflprob.at(row, col, 0) = static_cast<float>(rad.reflprob);
        out.normal.set_rgb(row, col, rad.normal);
      } catch (const std::exception& e) {
        ++error_counts[worker];
        if (errors[worker].empty()) errors[worker] = e.what();
        out.color.set_rgb(row, col, {0, 0, 0});
      }
    }
  });

  for (int w = 0; w < worker_count(); ++w) {
    out.error_pixels += error_counts[w];
    if (out.first_error.empty() && !errors[w].empty()) out.first_error = errors[w];
  }
  return out;
}

}  // namespace mirrorfield
