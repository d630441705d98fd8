// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mirrorfield/image.hpp"

namespace mirrorfield {

// 8-bit PNG round trip.  Writing quantizes with round(clamp(v, 0, 1) * 255);
// reading maps byte b to b / 255.  Grayscale files load as one channel,
// everything else as three (alpha is dropped).
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

}  // namespace mirrorfield
