// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/sh.hpp"

namespace mirrorfield {

namespace {
// sqrt(1/(4 pi)), sqrt(3/(4 pi)), and the degree-2 prefactors.
constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2a = 1.0925484305920792;
constexpr double kC2b = 0.31539156525252005;
constexpr double kC2c = 0.5462742152960396;
}  // namespace

void sh_basis(const Vec3& d, double out[kShCount]) {
  const double x = d.x, y = d.y, z = d.z;
  out[0] = kC0;
  out[1] = kC1 * y;
  out[2] = kC1 * z;
  out[3] = kC1 * x;
  out[4] = kC2a * x * y;
  out[5] = kC2a * y * z;
  out[6] = kC2b * (3.0 * z * z - 1.0);
  out[7] = kC2a * x * z;
  out[8] = kC2c * (x * x - y * y);
}

void sh_basis_grad(const Vec3& d, double out[kShCount], Vec3 grad[kShCount]) {
  sh_basis(d, out);
  const double x = d.x, y = d.y, z = d.z;
  grad[0] = {0, 0, 0};
  grad[1] = {0, kC1, 0};
  grad[2] = {0, 0, kC1};
  grad[3] = {kC1, 0, 0};
  grad[4] = {kC2a * y, kC2a * x, 0};
  grad[5] = {0, kC2a * z, kC2a * y};
  grad[6] = {0, 0, kC2b * 6.0 * z};
  grad[7] = {kC2a * z, 0, kC2a * x};
  grad[8] = {kC2c * 2.0 * x, -kC2c * 2.0 * y, 0};
}

}  // namespace mirrorfield
