// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mirrorfield/vec3.hpp"

namespace mirrorfield {

// Real spherical harmonics up to degree 2, evaluated as polynomials of a
// unit direction.  Order: l=0; l=1 m=-1,0,1 (y, z, x); l=2 m=-2..2
// (xy, yz, 3z^2-1, xz, x^2-y^2).
constexpr int kShCount = 9;

void sh_basis(const Vec3& d, double out[kShCount]);

// Basis values plus the gradient of each basis polynomial with respect to
// the direction components.
void sh_basis_grad(const Vec3& d, double out[kShCount], Vec3 grad[kShCount]);

}  // namespace mirrorfield
