// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mirrorfield/dataset.hpp"
#include "mirrorfield/image.hpp"

namespace mirrorfield {

// Peak signal-to-noise ratio in dB for images in [0,1]: 10*log10(1/MSE),
// capped at 99.  A mask (1 channel, 0/1) restricts the averaged pixels and
// must select at least one.
double psnr(const Image& a, const Image& b, const Image* mask = nullptr);

// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
// C2 = 0.03^2, averaged over channels.  Windows are clipped at image borders
// with renormalized weights.  A mask restricts window centers.
double ssim(const Image& a, const Image& b, const Image* mask = nullptr);

// Mean absolute depth difference over masked pixels.
double mirror_depth_mae(const Image& pred, const Image& gt, const Image& mask);

struct ViewMetrics {
  int view = 0;
  double psnr_full = 0;
  double ssim_full = 0;
  std::size_t mask_pixels = 0;
  // Valid only when mask_pixels > 0.
  double psnr_mask = 0;
  double ssim_mask = 0;
  double depth_mae = 0;
};

struct MetricsReport {
  std::vector<ViewMetrics> views;
  double mean_psnr = 0;
  double mean_ssim = 0;
  // Means over views whose mask is nonempty.
  double mean_psnr_mask = 0;
  double mean_ssim_mask = 0;
  double mean_depth_mae = 0;
  int masked_view_count = 0;
  std::size_t total_pixels = 0;
  std::size_t total_mask_pixels = 0;
};

MetricsReport evaluate_renders(const std::vector<Image>& pred_color,
                               const std::vector<Image>& pred_depth,
                               const SceneDataset& ds);

// JSON with fixed field names (see README).  States that LPIPS is omitted.
std::string report_to_json(const MetricsReport& r);

}  // namespace mirrorfield
