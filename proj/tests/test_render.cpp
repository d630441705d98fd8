// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mirrorfield/camera.hpp"
#include "mirrorfield/render.hpp"
#include "mirrorfield/rng.hpp"
#include "support.hpp"

using namespace mirrorfield;
using mftest::paint1;
using mftest::paint_color;

namespace {

const Aabb kBox{{-1, -1, -1}, {1, 1, 1}};

Ray axis_ray(const Vec3& origin, const Vec3& dir, double t_min = 0.02,
             double t_max = 4.0) {
  Ray r;
  r.origin = origin;
  r.dir = dir;
  r.bounce = 0;
  r.t_min = t_min;
  r.t_max = t_max;
  return r;
}

// Dense slab over an x interval, optionally a near-certain reflector with a
// raw normal pointing toward -x.
mftest::FieldParams slab_field(double x0, double x1, const Vec3& color,
                               bool mirror) {
  FieldParams f = make_field(kBox, 16, 2);
  f.density.fill(-40.0f);
  auto in_slab = [=](const Vec3& p) { return p.x >= x0 && p.x <= x1; };
  paint1(f.density, in_slab, 60.0f);
  paint_color(f.sh, in_slab, color);
  if (mirror) {
    paint1(f.reflprob, in_slab, 40.0f);
    const float nrm[3] = {-5, 0, 0};
    mftest::paint(f.normal, in_slab, nrm, 0, 3);
  } else {
    paint1(f.reflprob, in_slab, -40.0f);
  }
  return f;
}

// Mirror slab plus a wall behind the camera, so reflected rays see the wall.
FieldParams mirror_and_wall(const Vec3& wall_color) {
  FieldParams f = slab_field(0.375, 0.625, {0.1, 0.1, 0.1}, true);
  auto in_wall = [](const Vec3& p) { return p.x <= -0.625; };
  paint1(f.density, in_wall, 60.0f);
  paint_color(f.sh, in_wall, wall_color);
  paint1(f.reflprob, in_wall, -40.0f);
  const float nrm[3] = {5, 0, 0};
  mftest::paint(f.normal, in_wall, nrm, 0, 3);
  return f;
}

}  // namespace

TEST_CASE("principal pixel ray runs along the optical axis") {
  Camera cam = camera_from_fov(5, 5, 60.0);
  cam.cam_to_world = look_at({0.5, -0.3, 0.2}, {0.5, 1.7, 0.2});
  Ray r = pixel_ray(cam, 2, 2, 0.0, 4.0);
  Vec3 fwd = normalized(Vec3{0, 2, 0});
  CHECK(norm(r.dir - fwd) < 1e-12);
  CHECK(norm(r.origin - Vec3{0.5, -0.3, 0.2}) == 0.0);
}

TEST_CASE("pixel rays are unit length and mirror around the center") {
  Camera cam = camera_from_fov(5, 5, 75.0);
  cam.cam_to_world = look_at({0, 0, 0}, {1, 0, 0});
  Vec3 axis = normalized(Vec3{1, 0, 0});
  for (int row = 0; row < 5; ++row)
    for (int col = 0; col < 5; ++col) {
      Ray r = pixel_ray(cam, row, col, 0.0, 1.0);
      CHECK(std::abs(norm(r.dir) - 1.0) < 1e-12);
      Ray opp = pixel_ray(cam, 4 - row, 4 - col, 0.0, 1.0);
      CHECK(std::abs(dot(r.dir, axis) - dot(opp.dir, axis)) < 1e-12);
    }
  CHECK_THROWS_AS(pixel_ray(cam, 5, 0, 0.0, 1.0), ShapeError);
}

TEST_CASE("look_at poses are right-handed rotations") {
  RigidTransform t = look_at({1, 2, 0.5}, {-0.3, 0.4, 0.1});
  CHECK(std::abs(t.rot.det() - 1.0) < 1e-12);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double want = a == b ? 1.0 : 0.0;
      CHECK(std::abs(dot(t.rot.col[a], t.rot.col[b]) - want) < 1e-12);
    }
}

TEST_CASE("orbit poses sit on the requested circle") {
  const Vec3 target{0.2, -0.1, 0.3};
  auto poses = orbit_poses(12, 0.7, 0.25, target, 0.3, 2 * M_PI);
  REQUIRE(poses.size() == 12);
  for (const auto& p : poses) {
    Vec3 radial = p.trans - target;
    CHECK(std::abs(radial.z - 0.25) < 1e-12);
    radial.z = 0;
    CHECK(std::abs(norm(radial) - 0.7) < 1e-9);
  }
  // A full circle must not duplicate the seam view.
  CHECK(norm(poses.front().trans - poses.back().trans) > 1e-3);
}

TEST_CASE("stratified midpoints come out of half-cell jitter") {
  const double u[2] = {0.5, 0.5};
  SampleSet s = samples_from_jitter(0.0, 1.0, 2, u);
  CHECK(s.t[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.t[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.delta[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("stratified samples are ascending, in range, and repeatable") {
  Ray r = axis_ray({0, 0, 0}, {1, 0, 0}, 0.5, 3.5);
  Rng rng(99);
  SampleSet s = stratified_samples(r, 32, rng);
  REQUIRE(s.t.size() == 32);
  for (int i = 0; i < 32; ++i) {
    CHECK(s.t[i] >= 0.5);
    CHECK(s.t[i] <= 3.5);
    if (i > 0) CHECK(s.t[i] > s.t[i - 1]);
  }
  Rng rng2(99);
  SampleSet s2 = stratified_samples(r, 32, rng2);
  for (int i = 0; i < 32; ++i) CHECK(s.t[i] == s2.t[i]);
}

TEST_CASE("compositing weights follow the transmittance recurrence") {
  const double ln2 = std::log(2.0);
  std::vector<double> sigma{ln2}, delta{1.0}, w;
  double opacity = 0;
  composite(sigma, std::vector<double>{1.0}, delta, &w, &opacity);
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(opacity == doctest::Approx(0.5).epsilon(1e-12));

  sigma = {0.0, 0.0};
  delta = {1.0, 1.0};
  composite(sigma, std::vector<double>{1.0, 1.0}, delta, &w, &opacity);
  CHECK(w[0] == 0.0);
  CHECK(opacity == 0.0);

  sigma = {ln2, ln2};
  composite(sigma, std::vector<double>{1.0, 1.0}, delta, &w, &opacity);
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(opacity == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("compositing matches the closed-form total opacity") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_index(16));
    std::vector<double> sigma(n), delta(n);
    std::vector<Vec3> col(n);
    double exponent = 0;
    for (int i = 0; i < n; ++i) {
      sigma[i] = rng.uniform(0.0, 3.0);
      delta[i] = rng.uniform(0.01, 0.3);
      col[i] = {rng.uniform(), rng.uniform(), rng.uniform()};
      exponent += sigma[i] * delta[i];
    }
    std::vector<double> w;
    double opacity = 0;
    composite(sigma, col, delta, &w, &opacity);
    CHECK(opacity == doctest::Approx(1.0 - std::exp(-exponent)).epsilon(1e-10));
    double sum = 0;
    double prev_t = 1.0;
    for (int i = 0; i < n; ++i) {
      sum += w[i];
      double t_here = w[i] / (1.0 - std::exp(-sigma[i] * delta[i]) + 1e-300);
      CHECK(t_here <= prev_t + 1e-12);
      prev_t = t_here;
    }
    CHECK(sum <= 1.0 + 1e-12);
  }
  std::vector<double> bad{-0.1};
  std::vector<double> w;
  double opacity;
  CHECK_THROWS_AS(composite(bad, std::vector<double>{1.0}, {1.0}, &w, &opacity), Error);
}

TEST_CASE("empty fields render to zero radiometry") {
  FieldParams f = make_field(kBox, 4, 2);
  f.density.fill(-200.0f);
  Rng rng(1);
  RayRadiometry rad = render_primary(f, axis_ray({-0.9, 0, 0}, {1, 0, 0}), 32, rng);
  CHECK(rad.opacity < 1e-12);
  CHECK(norm(rad.color) < 1e-12);
  CHECK(rad.depth == 0.0);
}

TEST_CASE("saturated reflection logits make the mirror signal equal opacity") {
  FieldParams f = slab_field(0.0, 0.5, {0.6, 0.2, 0.2}, true);
  // Saturate everywhere, not just inside the slab, so edge cells cannot
  // interpolate the logit downward.
  f.reflprob.fill(40.0f);
  Rng rng(2);
  RayRadiometry rad = render_primary(f, axis_ray({-0.9, 0, 0}, {1, 0, 0}), 64, rng);
  CHECK(rad.reflprob == rad.opacity);
  CHECK(rad.opacity > 0.99);
}

TEST_CASE("opaque slab depth converges to the entry distance") {
  FieldParams f = slab_field(0.1, 0.7, {0.5, 0.5, 0.5}, false);
  const Ray ray = axis_ray({-0.9, 0, 0}, {1, 0, 0});
  // The camera span clips to the box, so samples cover t in [0.02, 1.9].
  // The 4096-sample render serves as the converged depth reference; it must
  // sit at the slab entry up to the one-cell interpolation ramp.
  Rng rng(3);
  RayRadiometry fine = render_primary(f, ray, 4096, rng);
  CHECK(fine.opacity > 1.0 - 1e-9);
  CHECK(std::abs(fine.depth - 1.0) <= 0.08);

  Rng rng2(4);
  RayRadiometry coarse = render_primary(f, ray, 256, rng2);
  CHECK(std::abs(coarse.depth - fine.depth) <= 2 * (1.9 - 0.02) / 256);
}

TEST_CASE("mirror weighted normals stay below total opacity") {
  FieldParams f = slab_field(-0.2, 0.4, {0.3, 0.3, 0.3}, true);
  Rng rng(5);
  RayRadiometry rad = render_primary(f, axis_ray({-0.9, 0.1, 0.05}, {1, 0, 0}), 64, rng);
  CHECK(norm(rad.normal) <= rad.opacity + 1e-9);
  CHECK(rad.reflprob <= rad.opacity + 1e-12);
}

TEST_CASE("reflection is the Householder map") {
  CHECK(norm(reflect_dir({0, 0, -1}, {0, 0, 1}) - Vec3{0, 0, 1}) < 1e-12);
  Vec3 d = normalized(Vec3{1, 0, -1});
  CHECK(norm(reflect_dir(d, {0, 0, 1}) - normalized(Vec3{1, 0, 1})) < 1e-12);

  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    Vec3 dd = normalized(rng.gaussian3());
    Vec3 nn = normalized(rng.gaussian3());
    Vec3 got = reflect_dir(dd, nn);
    // H = I - 2 n n^T applied explicitly.
    Mat3 h = Mat3::identity();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) h.col[a][b] -= 2.0 * nn[b] * nn[a];
    Vec3 want = h * dd;
    CHECK(norm(got - want) < 1e-12);
    CHECK(norm(reflect_dir(got, nn) - dd) < 1e-9);
    Vec3 tangent = normalized(cross(nn, norm2(dd) > 0 ? dd + Vec3{0.3, 0.1, 0.2} : dd));
    CHECK(std::abs(dot(reflect_dir(dd, nn), tangent) - dot(dd, tangent)) < 1e-9);
  }
  CHECK_THROWS_AS(reflect_dir({0, 0, 2}, {0, 0, 1}), Error);
}

TEST_CASE("reflected rays start at the expected surface point") {
  RayRadiometry rad;
  rad.depth = 1.25;
  rad.normal = {-0.4, 0, 0};
  Ray parent = axis_ray({-0.9, 0, 0}, {1, 0, 0});
  Ray child = spawn_reflected(parent, rad, 0.03);
  CHECK(norm(child.origin - Vec3{0.35, 0, 0}) < 1e-15);
  CHECK(child.bounce == 1);
  CHECK(child.t_min == 0.03);
  CHECK(child.t_max == parent.t_max);
  CHECK(norm(child.dir - Vec3{-1, 0, 0}) < 1e-12);

  rad.normal = {1e-9, 0, 0};
  CHECK_THROWS_AS(spawn_reflected(parent, rad, 0.03), DegenerateNormalError);
}

TEST_CASE("virtual mirror intersection covers hit, parallel, and edge cases") {
  VirtualMirror m;
  m.center = {2, 0, 0};
  m.u = {0, 1, 0};
  m.v = {0, 0, 1};
  m.n = {1, 0, 0};
  m.hu = 0.5;
  m.hv = 0.5;
  Ray r = axis_ray({0, 0, 0}, {1, 0, 0}, 0.0, 10.0);
  auto hit = intersect_virtual_mirror(r, m);
  REQUIRE(hit.has_value());
  CHECK(hit->first == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(norm(hit->second - Vec3{-1, 0, 0}) < 1e-15);

  Ray par = axis_ray({0, 0, 0}, {0, 1, 0}, 0.0, 10.0);
  CHECK_FALSE(intersect_virtual_mirror(par, m).has_value());

  Ray graze = axis_ray({0, 0.501, 0}, {1, 0, 0}, 0.0, 10.0);
  CHECK_FALSE(intersect_virtual_mirror(graze, m).has_value());
}

TEST_CASE("non-reflective fields trace exactly like a primary render") {
  FieldParams f = slab_field(0.0, 0.5, {0.7, 0.3, 0.2}, false);
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.9, 0.05, -0.1}, {1, 0, 0});
  Rng a(42), b(42);
  Vec3 traced = trace(scene, ray, 2, 64, a);
  RayRadiometry rad = render_primary(f, ray, 64, b);
  CHECK(traced.x == rad.color.x);
  CHECK(traced.y == rad.color.y);
  CHECK(traced.z == rad.color.z);
}

TEST_CASE("zero recursion budget reduces tracing to the primary render") {
  FieldParams f = mirror_and_wall({0.8, 0.15, 0.1});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0, 0}, {1, 0, 0});
  Rng a(43), b(43);
  Vec3 traced = trace(scene, ray, 0, 64, a);
  RayRadiometry rad = render_primary(f, ray, 64, b);
  CHECK(traced.x == rad.color.x);
  CHECK(traced.y == rad.color.y);
  CHECK(traced.z == rad.color.z);
}

TEST_CASE("mirror pixels blend primary and reflected colors") {
  FieldParams f = mirror_and_wall({0.8, 0.15, 0.1});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0, 0}, {1, 0, 0});
  const int n = 64;
  Rng a(44);
  Vec3 traced = trace(scene, ray, 2, n, a);

  // Hand-assembled two-term blend from two primary renders.
  Rng b(44);
  RayRadiometry rad = render_primary(f, ray, n, b);
  double te, tx;
  REQUIRE(intersect_aabb(f.bbox(), ray.origin, ray.dir, te, tx));
  const double lo = std::max(ray.t_min, te), hi = std::min(ray.t_max, tx);
  Ray child = spawn_reflected(ray, rad, 2.0 * (hi - lo) / n);
  Rng c(44);
  RayRadiometry refl = render_primary(f, child, n, c);
  Vec3 want = rad.color * (1.0 - rad.reflprob) + refl.color * rad.reflprob;
  CHECK(traced.x == doctest::Approx(want.x).epsilon(1e-12));
  CHECK(traced.y == doctest::Approx(want.y).epsilon(1e-12));
  CHECK(traced.z == doctest::Approx(want.z).epsilon(1e-12));

  // The wall is bright red and the mirror slab nearly black, so the blend
  // must land close to the wall color.
  CHECK(traced.x > 0.5);
  CHECK(traced.y < 0.35);

  // Blend convexity: each output channel stays within the hull of the two
  // inputs.
  for (int ch = 0; ch < 3; ++ch) {
    double lo_c = std::min(rad.color[ch], refl.color[ch]) - 1e-12;
    double hi_c = std::max(rad.color[ch], refl.color[ch]) + 1e-12;
    CHECK(traced[ch] >= lo_c);
    CHECK(traced[ch] <= hi_c);
  }
}

TEST_CASE("extra recursion budget changes nothing without secondary mirrors") {
  FieldParams f = mirror_and_wall({0.2, 0.6, 0.3});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0.02, 0.03}, {1, 0, 0});
  Rng a(45), b(45);
  Vec3 two = trace(scene, ray, 2, 64, a);
  Vec3 three = trace(scene, ray, 3, 64, b);
  CHECK(two.x == three.x);
  CHECK(two.y == three.y);
  CHECK(two.z == three.z);
}

TEST_CASE("single-entry composition reproduces the plain trace bitwise") {
  FieldParams f = mirror_and_wall({0.1, 0.4, 0.8});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.4, -0.06, 0.02}, {1, 0, 0});
  Rng a(46), b(46);
  Vec3 plain = trace(scene, ray, 2, 48, a);
  Vec3 composed = trace_composed(scene, ray, 2, 48, b);
  CHECK(plain.x == composed.x);
  CHECK(plain.y == composed.y);
  CHECK(plain.z == composed.z);
}

TEST_CASE("composition picks the nearest sufficiently opaque entry") {
  FieldParams near = slab_field(-0.2, 0.0, {0.9, 0.1, 0.1}, false);
  FieldParams far = slab_field(0.4, 0.6, {0.1, 0.9, 0.1}, false);
  ComposedScene both;
  both.entries.push_back({ComposedEntry::Kind::LearnedField, &near, {}, {}});
  both.entries.push_back({ComposedEntry::Kind::LearnedField, &far, {}, {}});
  Ray ray = axis_ray({-0.9, 0, 0}, {1, 0, 0});
  Rng a(47), b(47), c(47);
  Vec3 got = trace_composed(both, ray, 2, 64, a);
  Vec3 near_only = trace(single_field_scene(near), ray, 2, 64, b);
  CHECK(got.x == near_only.x);
  CHECK(got.y == near_only.y);
  CHECK(got.z == near_only.z);

  // Entry order must not matter.
  ComposedScene swapped;
  swapped.entries.push_back(both.entries[1]);
  swapped.entries.push_back(both.entries[0]);
  Vec3 got2 = trace_composed(swapped, ray, 2, 64, c);
  CHECK(got.x == got2.x);
}

TEST_CASE("identity self-substitution reproduces the plain trace bitwise") {
  FieldParams f = mirror_and_wall({0.8, 0.5, 0.1});
  ComposedScene plain_scene = single_field_scene(f);
  ComposedScene subst = single_field_scene(f);
  subst.substitution = Substitution{&f, RigidTransform{}};
  Ray ray = axis_ray({-0.5, 0.01, -0.04}, {1, 0, 0});
  Rng a(48), b(48);
  Vec3 plain = trace(plain_scene, ray, 2, 64, a);
  Vec3 sub = trace_substituted(subst, ray, 2, 64, b);
  CHECK(plain.x == sub.x);
  CHECK(plain.y == sub.y);
  CHECK(plain.z == sub.z);
}

TEST_CASE("substitution reroutes only the reflected content") {
  FieldParams base = mirror_and_wall({0.8, 0.15, 0.1});
  FieldParams green = make_field(kBox, 8, 2);
  green.density.fill(5.0f);
  paint_color(green.sh, [](const Vec3&) { return true; }, {0.1, 0.85, 0.1});
  green.reflprob.fill(-40.0f);

  ComposedScene subst = single_field_scene(base);
  subst.substitution = Substitution{&green, RigidTransform{}};

  Ray mirror_ray = axis_ray({-0.5, 0, 0}, {1, 0, 0});
  Rng a(49), b(49);
  Vec3 swapped = trace_substituted(subst, mirror_ray, 2, 64, a);
  Vec3 original = trace(single_field_scene(base), mirror_ray, 2, 64, b);
  CHECK(swapped.y > 0.6);
  CHECK(swapped.x < 0.3);
  CHECK(original.x > 0.5);

  // A ray that never reaches the mirror is untouched by the substitution.
  Ray wall_ray = axis_ray({-0.5, 0, 0}, {-1, 0, 0});
  Rng c(50), d(50);
  Vec3 sub_wall = trace_substituted(subst, wall_ray, 2, 64, c);
  Vec3 plain_wall = trace(single_field_scene(base), wall_ray, 2, 64, d);
  CHECK(sub_wall.x == plain_wall.x);
  CHECK(sub_wall.y == plain_wall.y);
  CHECK(sub_wall.z == plain_wall.z);
}

TEST_CASE("zero roughness falls back to the exact trace") {
  FieldParams f = mirror_and_wall({0.3, 0.3, 0.9});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0.03, 0.01}, {1, 0, 0});
  Rng a(51), b(51);
  Vec3 sharp = trace(scene, ray, 2, 48, a);
  Vec3 rough = trace_rough(scene, ray, 2, 48, 8, 0.0, b);
  CHECK(sharp.x == rough.x);
  CHECK(sharp.y == rough.y);
  CHECK(sharp.z == rough.z);
}

TEST_CASE("single-sample roughness is reproducible") {
  FieldParams f = mirror_and_wall({0.6, 0.2, 0.7});
  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0, 0}, {1, 0, 0});
  Rng a(52), b(52);
  Vec3 one = trace_rough(scene, ray, 2, 48, 1, 0.25, a);
  Vec3 two = trace_rough(scene, ray, 2, 48, 1, 0.25, b);
  CHECK(one.x == two.x);
  CHECK(one.y == two.y);
  CHECK(one.z == two.z);
}

TEST_CASE("roughness averaging shrinks variance like one over sample count") {
  // Mirror reflecting a wall that is red above the ray plane and blue below,
  // so perturbed reflections land on different colors.
  FieldParams f = slab_field(0.375, 0.625, {0.1, 0.1, 0.1}, true);
  auto wall_hi = [](const Vec3& p) { return p.x <= -0.625 && p.y >= 0.0; };
  auto wall_lo = [](const Vec3& p) { return p.x <= -0.625 && p.y < 0.0; };
  paint1(f.density, [](const Vec3& p) { return p.x <= -0.625; }, 60.0f);
  paint_color(f.sh, wall_hi, {0.9, 0.1, 0.1});
  paint_color(f.sh, wall_lo, {0.1, 0.1, 0.9});
  const float nrm[3] = {5, 0, 0};
  mftest::paint(f.normal, [](const Vec3& p) { return p.x <= -0.625; }, nrm, 0, 3);
  paint1(f.reflprob, [](const Vec3& p) { return p.x <= -0.625; }, -40.0f);

  ComposedScene scene = single_field_scene(f);
  Ray ray = axis_ray({-0.5, 0, 0}, {1, 0, 0});
  const double kappa = 0.35;
  const int outer = 100;

  auto sample_variance = [&](int k_samples) {
    std::vector<double> vals;
    vals.reserve(outer);
    for (int j = 0; j < outer; ++j) {
      Rng rng(9000 + j);
      Vec3 c = trace_rough(scene, ray, 2, 32, k_samples, kappa, rng);
      vals.push_back(c.x - c.z);
    }
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return var / (vals.size() - 1);
  };

  const double v4 = sample_variance(4);
  const double v16 = sample_variance(16);
  REQUIRE(v4 > 1e-8);
  const double ratio = v16 / v4;
  CHECK(ratio > 0.25 * 0.7);
  CHECK(ratio < 0.25 * 1.3);
}

TEST_CASE("full-frame rendering matches per-ray tracing and is deterministic") {
  FieldParams f = mirror_and_wall({0.7, 0.4, 0.2});
  ComposedScene scene = single_field_scene(f);
  Camera cam = camera_from_fov(1, 1, 60.0);
  cam.cam_to_world = look_at({-0.5, 0, 0}, {1, 0, 0});
  RenderConfig cfg;
  cfg.n_samples = 32;
  cfg.seed = 77;
  RenderOutputs out = render_image(scene, cam, cfg);
  REQUIRE(out.color.width == 1);
  REQUIRE(out.color.height == 1);
  CHECK(out.error_pixels == 0);

  Ray ray = pixel_ray(cam, 0, 0, cfg.t_min, cfg.t_max);
  Rng rng = Rng(77).fork(0);
  Vec3 want = trace(scene, ray, cfg.max_depth, cfg.n_samples, rng, cfg.trace);
  CHECK(out.color.at(0, 0, 0) == static_cast<float>(want.x));
  CHECK(out.color.at(0, 0, 1) == static_cast<float>(want.y));
  CHECK(out.color.at(0, 0, 2) == static_cast<float>(want.z));
}

TEST_CASE("frame renders with one seed are byte-identical") {
  FieldParams f = mirror_and_wall({0.4, 0.7, 0.3});
  ComposedScene scene = single_field_scene(f);
  Camera cam = camera_from_fov(8, 6, 70.0);
  cam.cam_to_world = look_at({-0.6, 0.1, 0.05}, {0.5, 0, 0});
  RenderConfig cfg;
  cfg.n_samples = 24;
  cfg.seed = 123;
  RenderOutputs a = render_image(scene, cam, cfg);
  RenderOutputs b = render_image(scene, cam, cfg);
  CHECK(a.color.data == b.color.data);
  CHECK(a.depth.data == b.depth.data);
  CHECK(a.normal.data == b.normal.data);

  for (std::size_t i = 0; i < a.reflprob.data.size(); ++i) {
    CHECK(a.reflprob.data[i] <= a.opacity.data[i] + 1e-6f);
    if (a.opacity.data[i] > 0.0f) {
      CHECK(a.depth.data[i] >= cfg.t_min);
      CHECK(a.depth.data[i] <= cfg.t_max);
    }
  }
}
