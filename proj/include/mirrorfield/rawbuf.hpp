// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mirrorfield/image.hpp"

namespace mirrorfield {

// Flat float32 container for non-color per-pixel data (depth, opacity,
// normals).  Layout: 8-byte magic "MRFRAW01", then u32 width, height,
// channels, reserved (zero), then width*height*channels little-endian
// float32 values in row-major order.
void write_rawbuf(const std::string& path, const Image& img);
Image read_rawbuf(const std::string& path);

}  // namespace mirrorfield
