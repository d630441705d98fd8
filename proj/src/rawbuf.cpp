// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/rawbuf.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace mirrorfield {

namespace {
constexpr char kMagic[8] = {'M', 'R', 'F', 'R', 'A', 'W', '0', '1'};
}

void write_rawbuf(const std::string& path, const Image& img) {
  if (img.width <= 0 || img.height <= 0 || img.channels <= 0)
    throw ShapeError("empty buffer");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(kMagic, 8);
  const std::uint32_t header[4] = {static_cast<std::uint32_t>(img.width),
                                   static_cast<std::uint32_t>(img.height),
                                   static_cast<std::uint32_t>(img.channels), 0};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path);
}

Image read_rawbuf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("bad magic in " + path);
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw IoError("truncated header in " + path);
  const std::uint32_t w = header[0], h = header[1], c = header[2];
  if (w == 0 || h == 0 || c == 0 || w > 1u << 16 || h > 1u << 16 || c > 16)
    throw IoError("implausible dimensions in " + path);
  Image img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  if (!in) throw IoError("truncated payload in " + path);
  return img;
}

}  // namespace mirrorfield
