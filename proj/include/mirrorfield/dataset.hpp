// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mirrorfield/camera.hpp"
#include "mirrorfield/image.hpp"
#include "mirrorfield/scenegen.hpp"

namespace mirrorfield {

// A posed ground-truth view: color, binary mirror mask, first-hit depth.
struct DatasetView {
  Camera cam;
  Image color;  // 3 channels in [0,1]
  Image mask;   // 1 channel, exactly 0 or 1
  Image depth;  // 1 channel, meters; 0 where nothing is hit
};

struct SceneDataset {
  std::vector<DatasetView> views;
  std::string scene_json;
};

DatasetView render_view(const AnalyticScene& scene, const Camera& cam,
                        int oracle_depth);

SceneDataset generate_dataset(const AnalyticScene& scene,
                              const std::vector<Camera>& cameras,
                              int oracle_depth);

// Cameras on an orbit, all with the same intrinsics.  height_amp as in
// orbit_poses: nonzero values weave the ring vertically so the views also
// differ in elevation.
std::vector<Camera> orbit_cameras(int n, int width, int height, double fov_deg,
                                  double radius, double height_z,
                                  const Vec3& target, double phase_rad,
                                  double arc_rad, double height_amp = 0.0);

// Directory layout:
//   images/NNNN.png   8-bit RGB
//   masks/NNNN.png    8-bit gray, 0 or 255
//   depth/NNNN.f32    raw float buffer (shared header format)
//   poses.json        intrinsics, resolution, per-view 3x4 camera-to-world
//                     (row-major [R | t])
//   scene.json        the analytic scene
// save_dataset builds the tree in a temporary sibling directory and renames
// it over the target, so an interrupted write leaves no partial dataset.
void save_dataset(const std::string& dir, const SceneDataset& ds);

// Loads and validates the layout above; any missing or inconsistent piece
// raises IoError.
SceneDataset load_dataset(const std::string& dir);

// Reads only the cameras from a poses.json file (per-view image paths are
// not required, so a bare pose list renders without ground truth).
std::vector<Camera> load_poses(const std::string& path);

}  // namespace mirrorfield
