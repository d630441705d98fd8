// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Counter-based stream: every draw hashes (key, counter) so results depend
// only on the key and how many values were consumed, never on call order
// elsewhere in the program.  Keys are derived by mixing tags into a parent
// key, which gives cheap independent substreams without shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  Rng fork(std::uint64_t tag) const { return Rng(mix(key_, tag ^ 0x9e3779b97f4a7c15ull)); }

  std::uint64_t next_u64() { return mix(key_, counter_++); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is below 2^-40 for the sizes used here.
    return next_u64() % n;
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 gaussian3() {
    const double a = gaussian();
    const double b = gaussian();
    const double c = gaussian();
    return {a, b, c};
  }

  static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ull * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mirrorfield
