// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "mirrorfield/config.hpp"
#include "mirrorfield/field.hpp"
#include "mirrorfield/train.hpp"

namespace mirrorfield {

// On-disk training state.  Binary layout (little-endian):
//   8-byte magic "MRFCKPT\0", u32 version, u64 config hash,
//   u32 config JSON length + bytes, i32 sh_degree,
//   four lattices (i32 nx,ny,nz,channels; f64 bbox min/max; f32 data),
//   u8 optimizer-present flag, then optimizer step (i64) and eight f32
//   moment arrays (u64 length each).
// Round trips are bit-exact.
struct Checkpoint {
  TrainConfig config;
  std::uint64_t config_hash = 0;
  std::int64_t step = 0;
  FieldParams params;
  OptimState optim;
  bool has_optim = false;
};

// Writes to a temporary file and renames it over the target.
void save_checkpoint(const std::string& path, const Checkpoint& c);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace mirrorfield
