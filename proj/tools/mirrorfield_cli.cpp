// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: dataset generation, training, rendering,
// evaluation, and scene-manipulation renders.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirrorfield/checkpoint.hpp"
#include "mirrorfield/dataset.hpp"
#include "mirrorfield/metrics.hpp"
#include "mirrorfield/png_io.hpp"
#include "mirrorfield/rawbuf.hpp"
#include "mirrorfield/render.hpp"
#include "mirrorfield/trainer.hpp"

namespace fs = std::filesystem;
using namespace mirrorfield;

namespace {

std::string stem4(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return buf;
}

std::pair<int, int> parse_res(const std::string& s) {
  int w = 0, h = 0;
  char x = 0;
  if (std::sscanf(s.c_str(), "%d%c%d", &w, &x, &h) != 3 || x != 'x' || w < 1 ||
      h < 1)
    throw ConfigError("resolution must look like 64x64");
  return {w, h};
}

std::vector<double> parse_csv(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string tok =
        s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in '" + s + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Vec3 parse_vec3(const std::string& s) {
  const auto v = parse_csv(s);
  if (v.size() != 3) throw ConfigError("expected three numbers in '" + s + "'");
  return {v[0], v[1], v[2]};
}

// center;u;v;hu,hv with each vector comma-separated.
VirtualMirror parse_mirror(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t semi = s.find(';', pos);
    parts.push_back(s.substr(pos, semi == std::string::npos ? std::string::npos
                                                            : semi - pos));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  if (parts.size() != 4)
    throw ConfigError("mirror spec is center;u;v;hu,hv");
  VirtualMirror m;
  m.center = parse_vec3(parts[0]);
  m.u = parse_vec3(parts[1]);
  m.v = parse_vec3(parts[2]);
  const auto he = parse_csv(parts[3]);
  if (he.size() != 2 || he[0] <= 0 || he[1] <= 0)
    throw ConfigError("mirror half extents must be two positive numbers");
  const double ul = norm(m.u), vl = norm(m.v);
  if (ul < 1e-12 || vl < 1e-12) throw ConfigError("mirror axes must be nonzero");
  m.u = m.u / ul;
  m.v = m.v / vl;
  if (std::abs(dot(m.u, m.v)) > 1e-9)
    throw ConfigError("mirror axes must be orthogonal");
  m.n = normalized(cross(m.u, m.v));
  m.hu = he[0];
  m.hv = he[1];
  return m;
}

// "identity", "tx,ty,tz", or "tx,ty,tz;rz_deg" (rotation about world z,
// then translation).
RigidTransform parse_transform(const std::string& s) {
  if (s == "identity" || s.empty()) return {};
  RigidTransform t;
  const std::size_t semi = s.find(';');
  t.trans = parse_vec3(s.substr(0, semi));
  if (semi != std::string::npos) {
    const double deg = std::stod(s.substr(semi + 1));
    const double a = deg * M_PI / 180.0;
    t.rot = Mat3::from_columns({std::cos(a), std::sin(a), 0},
                               {-std::sin(a), std::cos(a), 0}, {0, 0, 1});
  }
  return t;
}

RenderConfig render_config_from(const TrainConfig& cfg) {
  RenderConfig r;
  r.n_samples = cfg.n_samples;
  r.max_depth = cfg.max_depth;
  r.t_min = cfg.t_min;
  r.t_max = cfg.t_max;
  r.seed = cfg.seed;
  r.trace = trace_params_from(cfg);
  return r;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << text;
    if (!f) throw IoError("failed to write " + tmp);
  }
  fs::rename(tmp, path);
}

// Renders every camera and writes color plus the auxiliary buffers under a
// temporary directory that is renamed over out_dir when complete.
void render_frames(const ComposedScene& scene, const std::vector<Camera>& cams,
                   const RenderConfig& rcfg, const std::string& out_dir) {
  const fs::path target(out_dir);
  const fs::path tmp = target.parent_path().empty()
                           ? fs::path(target.string() + ".tmp")
                           : target.parent_path() /
                                 (target.filename().string() + ".tmp");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  for (const char* sub : {"color", "depth", "opacity", "reflprob", "normal"})
    fs::create_directories(tmp / sub);

  int bad_pixels = 0;
  std::string first_error;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const RenderOutputs out = render_image(scene, cams[i], rcfg);
    if (out.error_pixels > 0 && first_error.empty()) {
      bad_pixels += out.error_pixels;
      first_error = out.first_error;
    }
    const std::string stem = stem4(i);
    write_png((tmp / "color" / (stem + ".png")).string(), out.color);
    write_rawbuf((tmp / "depth" / (stem + ".f32")).string(), out.depth);
    write_rawbuf((tmp / "opacity" / (stem + ".f32")).string(), out.opacity);
    write_rawbuf((tmp / "reflprob" / (stem + ".f32")).string(), out.reflprob);
    write_rawbuf((tmp / "normal" / (stem + ".f32")).string(), out.normal);
  }
  fs::remove_all(target, ec);
  fs::rename(tmp, target);
  if (bad_pixels > 0)
    std::cerr << "warning: " << bad_pixels
              << " pixels failed and were blackened (" << first_error << ")\n";
}

struct GenArgs {
  std::string scene = "mirror-box";
  int views = 40;
  std::string res = "64x64";
  std::uint64_t seed = 1;
  std::string out;
  double radius = 0.55, height = 0.05, fov = 75.0;
  // The default orbit weaves up and down so rays cross the space in front of
  // the mirror at many elevations; a flat ring leaves that region visible
  // only through the mirror itself, which under-constrains its geometry.
  double height_amp = 0.35;
  double phase_deg = 0.0, arc_deg = 360.0;
  std::string target = "0,0,0";
  int oracle_depth = 4;
};

void run_gen(const GenArgs& a) {
  const auto [w, h] = parse_res(a.res);
  const AnalyticScene scene = builtin_scene(a.scene);
  const std::vector<Camera> cams = orbit_cameras(
      a.views, w, h, a.fov, a.radius, a.height, parse_vec3(a.target),
      a.phase_deg * M_PI / 180.0, a.arc_deg * M_PI / 180.0, a.height_amp);
  const SceneDataset ds = generate_dataset(scene, cams, a.oracle_depth);
  save_dataset(a.out, ds);
  std::cout << "wrote " << ds.views.size() << " views to " << a.out << "\n";
}

struct TrainArgs {
  std::string data, config, out, log, resume;
  int steps = -1;
  std::int64_t seed = -1;
  bool force = false;
};

void run_train(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_config(a.config);
  if (a.steps >= 0) cfg.steps = a.steps;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);

  const SceneDataset ds = load_dataset(a.data);

  std::optional<Checkpoint> warm;
  if (!a.resume.empty()) {
    warm = load_checkpoint(a.resume);
    if (warm->config_hash != config_hash(cfg)) {
      std::cerr << "warning: checkpoint config differs from the requested "
                   "config\n";
      if (!a.force)
        throw ConfigError("resume config mismatch; pass --force to continue");
    }
    if (!warm->has_optim)
      throw ConfigError("checkpoint has no optimizer state to resume from");
  }

  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw IoError("cannot open " + log_path + " for writing");
  log << "step,stage,lr,total,photometric,mask_bce,plane,normal_sup,"
         "normal_reg,spawned_rays\n";

  const auto save_state = [&](const FieldParams& p, const OptimState& o) {
    Checkpoint c;
    c.config = cfg;
    c.config_hash = config_hash(cfg);
    c.step = o.step;
    c.params = p;
    c.optim = o;
    c.has_optim = true;
    save_checkpoint(a.out, c);
  };

  const auto on_step = [&](int step, const StepMetrics& m, const FieldParams& p,
                           const OptimState& o) {
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.steps)) {
      log << step << ',' << m.stage << ',' << m.lr << ',' << m.total << ','
          << m.parts.photometric << ',' << m.parts.mask_bce << ','
          << m.parts.plane << ',' << m.parts.normal_sup << ','
          << m.parts.normal_reg << ',' << m.spawned_rays << '\n';
    }
    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0)
      save_state(p, o);
  };

  const TrainResult result =
      run_training(ds, cfg, on_step, warm ? &warm->params : nullptr,
                   warm ? &warm->optim : nullptr);
  save_state(result.params, result.optim);
  log.flush();
  std::cout << "trained to step " << result.optim.step << ", checkpoint at "
            << a.out << "\n";
}

struct RenderArgs {
  std::string ckpt, poses, out, rough;
  int max_depth = -1;
  std::int64_t seed = -1;
};

void apply_render_overrides(RenderConfig& rcfg, const RenderArgs& a) {
  if (a.max_depth >= 0) rcfg.max_depth = a.max_depth;
  if (a.seed >= 0) rcfg.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.rough.empty()) {
    const auto v = parse_csv(a.rough);
    if (v.size() != 2 || v[0] < 1 || v[1] < 0)
      throw ConfigError("--rough takes samples,kappa with samples >= 1");
    rcfg.rough_samples = static_cast<int>(v[0]);
    rcfg.rough_kappa = v[1];
  }
}

void run_render(const RenderArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  RenderConfig rcfg = render_config_from(ckpt.config);
  apply_render_overrides(rcfg, a);
  const std::vector<Camera> cams = load_poses(a.poses);
  render_frames(single_field_scene(ckpt.params), cams, rcfg, a.out);
  std::cout << "rendered " << cams.size() << " frames to " << a.out << "\n";
}

struct EvalArgs {
  std::string ckpt, data, out;
  int max_depth = -1;
  std::int64_t seed = -1;
};

void run_eval(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  RenderConfig rcfg = render_config_from(ckpt.config);
  if (a.max_depth >= 0) rcfg.max_depth = a.max_depth;
  if (a.seed >= 0) rcfg.seed = static_cast<std::uint64_t>(a.seed);
  const SceneDataset ds = load_dataset(a.data);
  const ComposedScene scene = single_field_scene(ckpt.params);
  std::vector<Image> colors, depths;
  for (const DatasetView& v : ds.views) {
    RenderOutputs out = render_image(scene, v.cam, rcfg);
    colors.push_back(std::move(out.color));
    depths.push_back(std::move(out.depth));
  }
  const MetricsReport report = evaluate_renders(colors, depths, ds);
  write_text_atomic(a.out, report_to_json(report));
  std::cout << "psnr " << report.mean_psnr << " ssim " << report.mean_ssim
            << " (inside mask: psnr " << report.mean_psnr_mask << ", depth mae "
            << report.mean_depth_mae << ") -> " << a.out << "\n";
}

struct EditCommon {
  std::string poses, out;
  RenderArgs render;  // ckpt filled per subcommand
};

void run_insert_mirror(const std::string& ckpt_path, const std::string& spec,
                       const EditCommon& e) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  RenderConfig rcfg = render_config_from(ckpt.config);
  apply_render_overrides(rcfg, e.render);
  ComposedScene scene = single_field_scene(ckpt.params);
  ComposedEntry entry;
  entry.kind = ComposedEntry::Kind::VirtualMirror;
  entry.mirror = parse_mirror(spec);
  scene.entries.push_back(entry);
  render_frames(scene, load_poses(e.poses), rcfg, e.out);
  std::cout << "rendered mirror insertion to " << e.out << "\n";
}

void run_substitute(const std::string& ckpt_path, const std::string& target_path,
                    const std::string& portal_spec, const EditCommon& e) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Checkpoint target = load_checkpoint(target_path);
  RenderConfig rcfg = render_config_from(ckpt.config);
  apply_render_overrides(rcfg, e.render);
  ComposedScene scene = single_field_scene(ckpt.params);
  Substitution sub;
  sub.target = &target.params;
  sub.portal = parse_transform(portal_spec);
  scene.substitution = sub;
  render_frames(scene, load_poses(e.poses), rcfg, e.out);
  std::cout << "rendered substitution to " << e.out << "\n";
}

void run_compose(const std::string& ckpts_csv, const std::string& transforms,
                 const EditCommon& e) {
  std::vector<std::string> paths;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = ckpts_csv.find(',', pos);
    paths.push_back(ckpts_csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  std::vector<std::string> tspecs;
  if (!transforms.empty()) {
    pos = 0;
    while (true) {
      const std::size_t bar = transforms.find('|', pos);
      tspecs.push_back(transforms.substr(
          pos, bar == std::string::npos ? std::string::npos : bar - pos));
      if (bar == std::string::npos) break;
      pos = bar + 1;
    }
  }
  if (!tspecs.empty() && tspecs.size() != paths.size())
    throw ConfigError("need one transform per checkpoint (separated by '|')");

  std::vector<Checkpoint> ckpts;
  ckpts.reserve(paths.size());
  for (const std::string& p : paths) ckpts.push_back(load_checkpoint(p));

  RenderConfig rcfg = render_config_from(ckpts[0].config);
  apply_render_overrides(rcfg, e.render);
  ComposedScene scene;
  for (std::size_t i = 0; i < ckpts.size(); ++i) {
    ComposedEntry entry;
    entry.kind = ComposedEntry::Kind::LearnedField;
    entry.field = &ckpts[i].params;
    if (!tspecs.empty())
      entry.world_to_entry = parse_transform(tspecs[i]).inverse();
    scene.entries.push_back(entry);
  }
  render_frames(scene, load_poses(e.poses), rcfg, e.out);
  std::cout << "rendered composition of " << ckpts.size() << " fields to "
            << e.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mirror-aware radiance field toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "generate an oracle dataset");
  g->add_option("--scene", gen.scene, "mirror-box or two-mirrors");
  g->add_option("--views", gen.views, "number of orbit views")->check(CLI::PositiveNumber);
  g->add_option("--res", gen.res, "resolution, e.g. 64x64");
  g->add_option("--seed", gen.seed, "accepted for interface uniformity; generation is deterministic");
  g->add_option("--out", gen.out, "output dataset directory")->required();
  g->add_option("--radius", gen.radius, "orbit radius");
  g->add_option("--height", gen.height, "orbit height above the target");
  g->add_option("--height-amp", gen.height_amp,
                "vertical weave amplitude (0 = flat ring)");
  g->add_option("--fov", gen.fov, "horizontal field of view, degrees");
  g->add_option("--phase-deg", gen.phase_deg, "first view azimuth, degrees");
  g->add_option("--arc-deg", gen.arc_deg, "orbit arc, degrees (360 = full circle)");
  g->add_option("--target", gen.target, "look-at point x,y,z");
  g->add_option("--oracle-depth", gen.oracle_depth, "reference tracer recursion depth");

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "optimize a field on a dataset");
  t->add_option("--data", train.data, "dataset directory")->required();
  t->add_option("--config", train.config, "config JSON (defaults when omitted)");
  t->add_option("--out", train.out, "checkpoint path")->required();
  t->add_option("--steps", train.steps, "override config steps");
  t->add_option("--seed", train.seed, "override config seed");
  t->add_option("--log", train.log, "CSV log path (default <out>.log.csv)");
  t->add_option("--resume", train.resume, "checkpoint to continue from");
  t->add_flag("--force", train.force, "resume despite a config mismatch");

  RenderArgs render;
  CLI::App* r = app.add_subcommand("render", "render frames from a checkpoint");
  r->add_option("--ckpt", render.ckpt, "checkpoint path")->required();
  r->add_option("--poses", render.poses, "poses.json path")->required();
  r->add_option("--out", render.out, "output frame directory")->required();
  r->add_option("--max-depth", render.max_depth, "override recursion depth");
  r->add_option("--rough", render.rough, "samples,kappa for rough reflection");
  r->add_option("--seed", render.seed, "override sampling seed");

  EvalArgs eval;
  CLI::App* ev = app.add_subcommand("eval", "compare a checkpoint to a dataset");
  ev->add_option("--ckpt", eval.ckpt, "checkpoint path")->required();
  ev->add_option("--data", eval.data, "dataset directory")->required();
  ev->add_option("--out", eval.out, "metrics JSON path")->required();
  ev->add_option("--max-depth", eval.max_depth, "override recursion depth");
  ev->add_option("--seed", eval.seed, "override sampling seed");

  CLI::App* edit = app.add_subcommand("edit", "scene manipulation renders");
  edit->require_subcommand(1);

  EditCommon ins_common;
  std::string ins_ckpt, ins_spec;
  CLI::App* ins = edit->add_subcommand("insert-mirror",
                                       "add a virtual mirror to a field");
  ins->add_option("--ckpt", ins_ckpt, "checkpoint path")->required();
  ins->add_option("--mirror", ins_spec, "center;u;v;hu,hv")->required();
  ins->add_option("--poses", ins_common.poses, "poses.json path")->required();
  ins->add_option("--out", ins_common.out, "output frame directory")->required();
  ins->add_option("--max-depth", ins_common.render.max_depth, "override recursion depth");
  ins->add_option("--rough", ins_common.render.rough, "samples,kappa for rough reflection");
  ins->add_option("--seed", ins_common.render.seed, "override sampling seed");

  EditCommon sub_common;
  std::string sub_ckpt, sub_target, sub_portal = "identity";
  CLI::App* sub = edit->add_subcommand("substitute",
                                       "reflect a different field in the mirror");
  sub->add_option("--ckpt", sub_ckpt, "checkpoint path")->required();
  sub->add_option("--target", sub_target, "checkpoint shown in reflections")->required();
  sub->add_option("--portal", sub_portal, "transform for reflected rays");
  sub->add_option("--poses", sub_common.poses, "poses.json path")->required();
  sub->add_option("--out", sub_common.out, "output frame directory")->required();
  sub->add_option("--max-depth", sub_common.render.max_depth, "override recursion depth");
  sub->add_option("--seed", sub_common.render.seed, "override sampling seed");

  EditCommon comp_common;
  std::string comp_ckpts, comp_transforms;
  CLI::App* comp = edit->add_subcommand("compose", "render several fields together");
  comp->add_option("--ckpts", comp_ckpts, "comma-separated checkpoint paths")->required();
  comp->add_option("--transforms", comp_transforms,
                   "per-field placement, '|'-separated");
  comp->add_option("--poses", comp_common.poses, "poses.json path")->required();
  comp->add_option("--out", comp_common.out, "output frame directory")->required();
  comp->add_option("--max-depth", comp_common.render.max_depth, "override recursion depth");
  comp->add_option("--seed", comp_common.render.seed, "override sampling seed");

  try {
    app.parse(argc, argv);
    if (g->parsed()) run_gen(gen);
    if (t->parsed()) run_train(train);
    if (r->parsed()) run_render(render);
    if (ev->parsed()) run_eval(eval);
    if (edit->parsed()) {
      if (ins->parsed()) run_insert_mirror(ins_ckpt, ins_spec, ins_common);
      if (sub->parsed()) run_substitute(sub_ckpt, sub_target, sub_portal, sub_common);
      if (comp->parsed()) run_compose(comp_ckpts, comp_transforms, comp_common);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
