// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirrorfield/camera.hpp"
#include "mirrorfield/field.hpp"
#include "mirrorfield/image.hpp"
#include "mirrorfield/rng.hpp"

namespace mirrorfield {

struct SampleSet {
  std::vector<double> t;
  std::vector<double> delta;
};

// Volume-rendered per-ray quantities.  depth is the weight-normalized
// expected sample depth (sum of w_i t_i over opacity), 0 when opacity is 0.
// normal is the raw weighted sum and is sub-unit in general.
struct RayRadiometry {
  Vec3 color{0, 0, 0};
  double depth = 0.0;
  Vec3 normal{0, 0, 0};
  double reflprob = 0.0;
  double opacity = 0.0;
};

// Rectangle reflector: center plus an orthonormal frame (u, v, n) and half
// extents along u and v.
struct VirtualMirror {
  Vec3 center;
  Vec3 u, v, n;
  double hu = 0.0, hv = 0.0;
};

struct ComposedEntry {
  enum class Kind { LearnedField, VirtualMirror } kind = Kind::LearnedField;
  const FieldParams* field = nullptr;
  VirtualMirror mirror;
  // Maps world coordinates into the entry's own frame.
  RigidTransform world_to_entry;
};

struct Substitution {
  const FieldParams* target = nullptr;
  // Applied to reflected rays (world frame) before rendering them in target.
  RigidTransform portal;
};

struct ComposedScene {
  std::vector<ComposedEntry> entries;
  std::optional<Substitution> substitution;
};

ComposedScene single_field_scene(const FieldParams& f);

struct TraceParams {
  double tau = 0.05;            // spawn reflections only when M exceeds this
  double epsilon = 0.0;         // reflected-ray start offset; 0 = 2x mean spacing
  double occlusion_threshold = 0.5;  // opacity needed to enter the depth contest
  double term_eps = 1e-12;      // stop marching once transmittance drops below
  double skip_eps = 1e-12;      // skip value queries for weights below
  double child_t_max = 0.0;     // far bound for reflected rays; 0 = inherit
};

struct RenderConfig {
  int n_samples = 64;
  int max_depth = 2;
  double t_min = 0.02;
  double t_max = 4.0;
  std::uint64_t seed = 0;
  TraceParams trace;
  int rough_samples = 0;   // > 0 together with rough_kappa enables averaging
  double rough_kappa = 0.0;
};

SampleSet stratified_samples(const Ray& ray, int n, Rng& rng);
// Same stratification driven by caller-supplied jitter values in [0,1).
SampleSet samples_from_jitter(double t_min, double t_max, int n, const double* u);

// Weights w_i = T_i a_i from densities and spacings; opacity = sum w_i.
// Never truncates.
void compute_weights(const std::vector<double>& sigma,
                     const std::vector<double>& delta,
                     std::vector<double>* weights, double* opacity);

Vec3 composite(const std::vector<double>& sigma, const std::vector<Vec3>& value,
               const std::vector<double>& delta, std::vector<double>* weights,
               double* opacity);
double composite(const std::vector<double>& sigma, const std::vector<double>& value,
                 const std::vector<double>& delta, std::vector<double>* weights,
                 double* opacity);

RayRadiometry render_primary(const FieldParams& field, const Ray& ray, int n,
                             Rng& rng, const TraceParams& params = {});

Vec3 reflect_dir(const Vec3& d, const Vec3& n);

Ray spawn_reflected(const Ray& ray, const RayRadiometry& rad, double epsilon);

// (t, normal facing the ray) for a ray/rectangle hit past ray.t_min, none
// otherwise.
std::optional<std::pair<double, Vec3>> intersect_virtual_mirror(
    const Ray& ray, const VirtualMirror& mirror);

Vec3 trace(const ComposedScene& scene, const Ray& ray, int max_depth, int n,
           Rng& rng, const TraceParams& params = {});

Vec3 trace_rough(const ComposedScene& scene, const Ray& ray, int max_depth, int n,
                 int k_samples, double kappa, Rng& rng,
                 const TraceParams& params = {});

Vec3 trace_composed(const ComposedScene& scene, const Ray& ray, int max_depth,
                    int n, Rng& rng, const TraceParams& params = {});

Vec3 trace_substituted(const ComposedScene& scene, const Ray& ray, int max_depth,
                       int n, Rng& rng, const TraceParams& params = {});

struct RenderOutputs {
  Image color;     // H x W x 3
  Image depth;     // H x W x 1
  Image opacity;   // H x W x 1
  Image reflprob;  // H x W x 1
  Image normal;    // H x W x 3
  int error_pixels = 0;
  std::string first_error;
};

// Full-frame render; auxiliary buffers hold the bounce-0 radiometry of the
// winning entry.  Per-pixel failures blacken the pixel and are reported in
// error_pixels rather than aborting the frame.
RenderOutputs render_image(const ComposedScene& scene, const Camera& cam,
                           const RenderConfig& cfg);

}  // namespace mirrorfield
