// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Row-major float image, values nominally in [0, 1] for color data.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c) {
    data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
  }

  float& at(int row, int col, int c) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + c];
  }
  float at(int row, int col, int c) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + c];
  }

  Vec3 rgb(int row, int col) const {
    const std::size_t i = (static_cast<std::size_t>(row) * width + col) * channels;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set_rgb(int row, int col, const Vec3& v) {
    const std::size_t i = (static_cast<std::size_t>(row) * width + col) * channels;
    data[i] = static_cast<float>(v.x);
    data[i + 1] = static_cast<float>(v.y);
    data[i + 2] = static_cast<float>(v.z);
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

}  // namespace mirrorfield
