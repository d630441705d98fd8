// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/metrics.hpp"

#include <cmath>

#include <json.hpp>

namespace mirrorfield {

using nlohmann::json;

namespace {
constexpr double kPsnrCap = 99.0;
constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 1e-4;
constexpr double kC2 = 9e-4;

void check_pair(const Image& a, const Image& b, const Image* mask) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ShapeError("image dimensions differ");
  if (mask && (mask->width != a.width || mask->height != a.height ||
               mask->channels != 1))
    throw ShapeError("mask dimensions differ from images");
}
}  // namespace

double psnr(const Image& a, const Image& b, const Image* mask) {
  check_pair(a, b, mask);
  double se = 0;
  std::size_t n = 0;
  for (int r = 0; r < a.height; ++r) {
    for (int c = 0; c < a.width; ++c) {
      if (mask && mask->at(r, c, 0) == 0.0f) continue;
      for (int ch = 0; ch < a.channels; ++ch) {
        const double d = static_cast<double>(a.at(r, c, ch)) - b.at(r, c, ch);
        se += d * d;
      }
      ++n;
    }
  }
  if (n == 0) throw ShapeError("mask selects no pixels");
  const double mse = se / (static_cast<double>(n) * a.channels);
  if (mse <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const Image* mask) {
  check_pair(a, b, mask);
  if (a.width < kWin || a.height < kWin)
    throw ShapeError("image smaller than the SSIM window");

  double g[kWin];
  const int half = kWin / 2;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - half;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }

  double total = 0;
  std::size_t centers = 0;
  for (int r = 0; r < a.height; ++r) {
    for (int c = 0; c < a.width; ++c) {
      if (mask && mask->at(r, c, 0) == 0.0f) continue;
      ++centers;
      for (int ch = 0; ch < a.channels; ++ch) {
        double wsum = 0, ma = 0, mb = 0;
        for (int dr = -half; dr <= half; ++dr) {
          const int rr = r + dr;
          if (rr < 0 || rr >= a.height) continue;
          for (int dc = -half; dc <= half; ++dc) {
            const int cc = c + dc;
            if (cc < 0 || cc >= a.width) continue;
            const double w = g[dr + half] * g[dc + half];
            wsum += w;
            ma += w * a.at(rr, cc, ch);
            mb += w * b.at(rr, cc, ch);
          }
        }
        ma /= wsum;
        mb /= wsum;
        double va = 0, vb = 0, cov = 0;
        for (int dr = -half; dr <= half; ++dr) {
          const int rr = r + dr;
          if (rr < 0 || rr >= a.height) continue;
          for (int dc = -half; dc <= half; ++dc) {
            const int cc = c + dc;
            if (cc < 0 || cc >= a.width) continue;
            const double w = g[dr + half] * g[dc + half];
            const double da = a.at(rr, cc, ch) - ma;
            const double db = b.at(rr, cc, ch) - mb;
            va += w * da * da;
            vb += w * db * db;
            cov += w * da * db;
          }
        }
        va /= wsum;
        vb /= wsum;
        cov /= wsum;
        const double num = (2 * ma * mb + kC1) * (2 * cov + kC2);
        const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
        total += num / den;
      }
    }
  }
  if (centers == 0) throw ShapeError("mask selects no pixels");
  return total / (static_cast<double>(centers) * a.channels);
}

double mirror_depth_mae(const Image& pred, const Image& gt, const Image& mask) {
  if (pred.channels != 1 || gt.channels != 1)
    throw ShapeError("depth images must have one channel");
  check_pair(pred, gt, &mask);
  double sum = 0;
  std::size_t n = 0;
  for (int r = 0; r < pred.height; ++r) {
    for (int c = 0; c < pred.width; ++c) {
      if (mask.at(r, c, 0) == 0.0f) continue;
      sum += std::abs(static_cast<double>(pred.at(r, c, 0)) - gt.at(r, c, 0));
      ++n;
    }
  }
  if (n == 0) throw ShapeError("mask selects no pixels");
  return sum / static_cast<double>(n);
}

MetricsReport evaluate_renders(const std::vector<Image>& pred_color,
                               const std::vector<Image>& pred_depth,
                               const SceneDataset& ds) {
  if (pred_color.size() != ds.views.size() ||
      pred_depth.size() != ds.views.size())
    throw ShapeError("prediction count does not match the dataset");
  MetricsReport rep;
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    const DatasetView& v = ds.views[i];
    ViewMetrics m;
    m.view = static_cast<int>(i);
    m.psnr_full = psnr(pred_color[i], v.color);
    m.ssim_full = ssim(pred_color[i], v.color);
    for (const float f : v.mask.data) m.mask_pixels += f != 0.0f;
    if (m.mask_pixels > 0) {
      m.psnr_mask = psnr(pred_color[i], v.color, &v.mask);
      m.ssim_mask = ssim(pred_color[i], v.color, &v.mask);
      m.depth_mae = mirror_depth_mae(pred_depth[i], v.depth, v.mask);
      rep.mean_psnr_mask += m.psnr_mask;
      rep.mean_ssim_mask += m.ssim_mask;
      rep.mean_depth_mae += m.depth_mae;
      ++rep.masked_view_count;
    }
    rep.mean_psnr += m.psnr_full;
    rep.mean_ssim += m.ssim_full;
    rep.total_pixels += pred_color[i].pixel_count();
    rep.total_mask_pixels += m.mask_pixels;
    rep.views.push_back(m);
  }
  const double nv = static_cast<double>(ds.views.size());
  rep.mean_psnr /= nv;
  rep.mean_ssim /= nv;
  if (rep.masked_view_count > 0) {
    rep.mean_psnr_mask /= rep.masked_view_count;
    rep.mean_ssim_mask /= rep.masked_view_count;
    rep.mean_depth_mae /= rep.masked_view_count;
  }
  return rep;
}

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["mean"] = {{"psnr", r.mean_psnr}, {"ssim", r.mean_ssim}};
  if (r.masked_view_count > 0) {
    j["mean_inside_mask"] = {{"psnr", r.mean_psnr_mask},
                             {"ssim", r.mean_ssim_mask},
                             {"depth_mae", r.mean_depth_mae}};
  } else {
    j["mean_inside_mask"] = nullptr;
  }
  j["masked_view_count"] = r.masked_view_count;
  j["total_pixels"] = r.total_pixels;
  j["total_mask_pixels"] = r.total_mask_pixels;
  j["lpips"] = "omitted: needs a pretrained network";
  json views = json::array();
  for (const ViewMetrics& m : r.views) {
    json v;
    v["view"] = m.view;
    v["psnr"] = m.psnr_full;
    v["ssim"] = m.ssim_full;
    v["mask_pixels"] = m.mask_pixels;
    if (m.mask_pixels > 0) {
      v["inside_mask"] = {{"psnr", m.psnr_mask},
                          {"ssim", m.ssim_mask},
                          {"depth_mae", m.depth_mae}};
    } else {
      v["inside_mask"] = nullptr;
    }
    views.push_back(std::move(v));
  }
  j["views"] = std::move(views);
  return j.dump(2) + "\n";
}

}  // namespace mirrorfield
