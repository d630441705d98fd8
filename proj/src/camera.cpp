// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/camera.hpp"

#include <cmath>

namespace mirrorfield {

Camera camera_from_fov(int width, int height, double fov_deg) {
  if (width < 1 || height < 1) throw ShapeError("empty camera");
  if (fov_deg <= 0.0 || fov_deg >= 180.0) throw ConfigError("fov out of range");
  Camera cam;
  cam.width = width;
  cam.height = height;
  const double f = 0.5 * width / std::tan(0.5 * fov_deg * M_PI / 180.0);
  cam.fx = f;
  cam.fy = f;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  return cam;
}

RigidTransform look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 fwd = target - eye;
  if (norm(fwd) < 1e-12) throw ConfigError("look_at: eye equals target");
  const Vec3 z = normalized(fwd);
  Vec3 x = cross(z, Vec3{0, 0, 1});
  if (norm(x) < 1e-9) {
    // Looking straight up or down; pick a fixed horizontal right axis.
    x = Vec3{1, 0, 0};
  } else {
    x = normalized(x);
  }
  const Vec3 y = cross(z, x);
  RigidTransform t;
  t.rot = Mat3::from_columns(x, y, z);
  t.trans = eye;
  return t;
}

Ray pixel_ray(const Camera& cam, int row, int col, double t_min, double t_max) {
  if (row < 0 || row >= cam.height || col < 0 || col >= cam.width)
    throw ShapeError("pixel out of bounds");
  const Vec3 d_cam{(col - cam.cx) / cam.fx, (row - cam.cy) / cam.fy, 1.0};
  Ray r;
  r.origin = cam.cam_to_world.trans;
  r.dir = cam.cam_to_world.rot * normalized(d_cam);
  r.bounce = 0;
  r.t_min = t_min;
  r.t_max = t_max;
  return r;
}

std::vector<Ray> generate_rays(const Camera& cam,
                               const std::vector<std::pair<int, int>>& pixels,
                               double t_min, double t_max) {
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const auto& [row, col] : pixels)
    rays.push_back(pixel_ray(cam, row, col, t_min, t_max));
  return rays;
}

std::vector<RigidTransform> orbit_poses(int n, double radius, double height,
                                        const Vec3& target, double phase_rad,
                                        double arc_rad, double height_amp) {
  if (n < 1) throw ConfigError("orbit needs at least one view");
  if (radius <= 0.0) throw ConfigError("orbit radius must be positive");
  std::vector<RigidTransform> poses;
  poses.reserve(n);
  const bool full = std::abs(arc_rad - 2.0 * M_PI) < 1e-9;
  // A full circle spaces views by arc/n so view n would coincide with view 0;
  // a partial arc includes both endpoints.
  const double step = n == 1 ? 0.0 : (full ? arc_rad / n : arc_rad / (n - 1));
  for (int i = 0; i < n; ++i) {
    const double a = phase_rad + step * i;
    const Vec3 eye{target.x + radius * std::cos(a), target.y + radius * std::sin(a),
                   target.z + height + height_amp * std::sin(2.0 * a)};
    poses.push_back(look_at(eye, target));
  }
  return poses;
}

}  // namespace mirrorfield
