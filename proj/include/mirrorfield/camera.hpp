// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Pinhole camera.  Camera frame: +z forward along the view axis, +x right,
// +y down (image row direction).  Pixel (row, col) maps to the camera-space
// direction ((col - cx)/fx, (row - cy)/fy, 1), normalized, then rotated to
// world by the camera-to-world pose.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  RigidTransform cam_to_world;
  int width = 0, height = 0;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;
  int bounce = 0;
  double t_min = 0.0;
  double t_max = 0.0;
};

// Symmetric intrinsics from a horizontal field of view in degrees.
Camera camera_from_fov(int width, int height, double fov_deg);

// Pose looking from eye toward target with world up (0,0,1).
RigidTransform look_at(const Vec3& eye, const Vec3& target);

Ray pixel_ray(const Camera& cam, int row, int col, double t_min, double t_max);

std::vector<Ray> generate_rays(const Camera& cam,
                               const std::vector<std::pair<int, int>>& pixels,
                               double t_min, double t_max);

// Positions n cameras on a circle of the given radius and height, each
// looking at the target.  Azimuth i = phase + arc * i / n (full circle:
// arc = 2 pi, views spread evenly without duplicating the seam).  A nonzero
// height_amp turns the ring into a wave: the eye height oscillates by
// height_amp * sin(2 * azimuth), so a full revolution sweeps two vertical
// periods and a half arc still covers the full height range.
std::vector<RigidTransform> orbit_poses(int n, double radius, double height,
                                        const Vec3& target, double phase_rad,
                                        double arc_rad, double height_amp = 0.0);

}  // namespace mirrorfield
