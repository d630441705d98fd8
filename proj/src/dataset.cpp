// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mirrorfield/png_io.hpp"
#include "mirrorfield/rawbuf.hpp"
#include "mirrorfield/threading.hpp"

namespace mirrorfield {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetView render_view(const AnalyticScene& scene, const Camera& cam,
                        int oracle_depth) {
  DatasetView view;
  view.cam = cam;
  view.color = Image(cam.width, cam.height, 3);
  view.mask = Image(cam.width, cam.height, 1);
  view.depth = Image(cam.width, cam.height, 1);
  parallel_for(0, static_cast<std::size_t>(cam.width) * cam.height,
               [&](int, std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i) {
                   const int row = static_cast<int>(i) / cam.width;
                   const int col = static_cast<int>(i) % cam.width;
                   const Ray ray = pixel_ray(cam, row, col, 0.0, 0.0);
                   const OracleSample s = oracle_trace(scene, ray, oracle_depth);
                   view.color.set_rgb(row, col, clamp01(s.color));
                   view.mask.at(row, col, 0) = s.mirror_flag ? 1.0f : 0.0f;
                   view.depth.at(row, col, 0) = static_cast<float>(s.t_first);
                 }
               });
  return view;
}

SceneDataset generate_dataset(const AnalyticScene& scene,
                              const std::vector<Camera>& cameras,
                              int oracle_depth) {
  if (cameras.empty()) throw ConfigError("dataset needs at least one view");
  SceneDataset ds;
  ds.scene_json = scene_to_json(scene);
  ds.views.reserve(cameras.size());
  for (const Camera& cam : cameras)
    ds.views.push_back(render_view(scene, cam, oracle_depth));
  return ds;
}

std::vector<Camera> orbit_cameras(int n, int width, int height, double fov_deg,
                                  double radius, double height_z,
                                  const Vec3& target, double phase_rad,
                                  double arc_rad, double height_amp) {
  const Camera proto = camera_from_fov(width, height, fov_deg);
  const std::vector<RigidTransform> poses =
      orbit_poses(n, radius, height_z, target, phase_rad, arc_rad, height_amp);
  std::vector<Camera> cams(poses.size(), proto);
  for (std::size_t i = 0; i < poses.size(); ++i) cams[i].cam_to_world = poses[i];
  return cams;
}

namespace {

std::string view_stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return buf;
}

json pose_json(const RigidTransform& p) {
  json m = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.push_back(p.rot.col[c][r]);
    m.push_back(p.trans[r]);
  }
  return m;
}

RigidTransform pose_from_json(const json& m) {
  if (!m.is_array() || m.size() != 12)
    throw IoError("pose must be a 12-element row-major 3x4 array");
  RigidTransform p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rot.col[c][r] = m[r * 4 + c].get<double>();
    p.trans[r] = m[r * 4 + 3].get<double>();
  }
  return p;
}

}  // namespace

void save_dataset(const std::string& dir, const SceneDataset& ds) {
  if (ds.views.empty()) throw ConfigError("refusing to save an empty dataset");
  const Camera& c0 = ds.views[0].cam;
  for (const DatasetView& v : ds.views) {
    if (v.cam.width != c0.width || v.cam.height != c0.height ||
        v.cam.fx != c0.fx || v.cam.fy != c0.fy || v.cam.cx != c0.cx ||
        v.cam.cy != c0.cy)
      throw ConfigError("all views must share resolution and intrinsics");
    if (v.color.width != c0.width || v.color.height != c0.height ||
        v.color.channels != 3 || v.mask.channels != 1 || v.depth.channels != 1)
      throw ShapeError("view buffers do not match the camera resolution");
  }

  const fs::path target(dir);
  const fs::path tmp = target.parent_path().empty()
                           ? fs::path(target.string() + ".tmp")
                           : target.parent_path() /
                                 (target.filename().string() + ".tmp");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp / "images");
  fs::create_directories(tmp / "masks");
  fs::create_directories(tmp / "depth");

  json poses;
  poses["resolution"] = {c0.width, c0.height};
  poses["intrinsics"] = {
      {"fx", c0.fx}, {"fy", c0.fy}, {"cx", c0.cx}, {"cy", c0.cy}};
  json views = json::array();
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    const std::string stem = view_stem(i);
    write_png((tmp / "images" / (stem + ".png")).string(), ds.views[i].color);
    write_png((tmp / "masks" / (stem + ".png")).string(), ds.views[i].mask);
    write_rawbuf((tmp / "depth" / (stem + ".f32")).string(), ds.views[i].depth);
    json v;
    v["image"] = "images/" + stem + ".png";
    v["mask"] = "masks/" + stem + ".png";
    v["depth"] = "depth/" + stem + ".f32";
    v["c2w"] = pose_json(ds.views[i].cam.cam_to_world);
    views.push_back(std::move(v));
  }
  poses["views"] = std::move(views);

  {
    std::ofstream f(tmp / "poses.json", std::ios::binary);
    f << poses.dump(2) << "\n";
    if (!f) throw IoError("failed to write poses.json");
  }
  {
    std::ofstream f(tmp / "scene.json", std::ios::binary);
    f << ds.scene_json;
    if (!f) throw IoError("failed to write scene.json");
  }

  fs::remove_all(target, ec);
  fs::rename(tmp, target);
}

std::vector<Camera> load_poses(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  json poses;
  try {
    poses = json::parse(std::string(std::istreambuf_iterator<char>(f), {}));
  } catch (const json::exception& e) {
    throw IoError(std::string("pose file parse failure: ") + e.what());
  }
  std::vector<Camera> cams;
  try {
    const json& res = poses.at("resolution");
    const json& intr = poses.at("intrinsics");
    Camera proto;
    proto.width = res.at(0).get<int>();
    proto.height = res.at(1).get<int>();
    proto.fx = intr.at("fx").get<double>();
    proto.fy = intr.at("fy").get<double>();
    proto.cx = intr.at("cx").get<double>();
    proto.cy = intr.at("cy").get<double>();
    if (proto.width < 1 || proto.height < 1 || proto.fx <= 0 || proto.fy <= 0)
      throw IoError("invalid resolution or intrinsics in " + path);
    for (const json& v : poses.at("views")) {
      Camera cam = proto;
      cam.cam_to_world = pose_from_json(v.at("c2w"));
      cams.push_back(cam);
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("pose file schema failure: ") + e.what());
  }
  if (cams.empty()) throw IoError("pose file lists no views");
  return cams;
}

SceneDataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const auto read_text = [&](const char* name) {
    std::ifstream f(root / name, std::ios::binary);
    if (!f) throw IoError(std::string("missing ") + name + " in " + dir);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };

  json poses;
  try {
    poses = json::parse(read_text("poses.json"));
  } catch (const json::exception& e) {
    throw IoError(std::string("poses.json parse failure: ") + e.what());
  }

  SceneDataset ds;
  ds.scene_json = read_text("scene.json");
  scene_from_json(ds.scene_json);  // validate

  try {
    const json& res = poses.at("resolution");
    const int w = res.at(0).get<int>();
    const int h = res.at(1).get<int>();
    const json& intr = poses.at("intrinsics");
    Camera proto;
    proto.width = w;
    proto.height = h;
    proto.fx = intr.at("fx").get<double>();
    proto.fy = intr.at("fy").get<double>();
    proto.cx = intr.at("cx").get<double>();
    proto.cy = intr.at("cy").get<double>();
    if (w < 1 || h < 1 || proto.fx <= 0 || proto.fy <= 0)
      throw IoError("invalid resolution or intrinsics");

    for (const json& v : poses.at("views")) {
      DatasetView view;
      view.cam = proto;
      view.cam.cam_to_world = pose_from_json(v.at("c2w"));
      view.color = read_png((root / v.at("image").get<std::string>()).string());
      view.mask = read_png((root / v.at("mask").get<std::string>()).string());
      view.depth = read_rawbuf((root / v.at("depth").get<std::string>()).string());
      if (view.color.width != w || view.color.height != h ||
          view.color.channels != 3)
        throw IoError("color image does not match the declared resolution");
      if (view.mask.width != w || view.mask.height != h || view.mask.channels != 1)
        throw IoError("mask does not match the declared resolution");
      if (view.depth.width != w || view.depth.height != h ||
          view.depth.channels != 1)
        throw IoError("depth does not match the declared resolution");
      // Masks must be strictly binary (bytes 0 or 255).
      for (const float m : view.mask.data)
        if (m != 0.0f && m != 1.0f)
          throw IoError("mask contains non-binary values");
      ds.views.push_back(std::move(view));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("poses.json schema failure: ") + e.what());
  }
  if (ds.views.empty()) throw IoError("dataset contains no views");
  return ds;
}

}  // namespace mirrorfield
