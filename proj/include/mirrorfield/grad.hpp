// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "mirrorfield/render.hpp"

namespace mirrorfield {

// One marched sample with everything the backward pass needs.
struct SampleRec {
  double t = 0, delta = 0;
  Vec3 p;
  double sigma = 0;        // activated density
  double passed = 0;       // exp(-sigma * delta)
  double transmittance = 0;  // T_i before this sample
  double w = 0;
  Vec3 color;
  Vec3 nraw;
  double nlen = 0;
  double m = 0;
  bool queried = false;
  bool n_ok = false;
};

// One ray of the recorded trace tree (a chain: at most one reflection per
// bounce).  Produced by forward_records; replayed by backward_records.
struct RayRec {
  Ray ray;
  bool empty = true;
  double lo = 0, hi = 0;
  int marched = 0;
  std::vector<SampleRec> samples;
  RayRadiometry rad;
  double sum_wt = 0;
  bool spawned = false;
  Vec3 nu;       // unit normal fed into the reflection
  double hlen = 0;  // norm of d - 2(d.nu)nu before renormalization
  std::unique_ptr<RayRec> child;
  Vec3 color_p;  // blended output at this node
};

// Extra per-sample loss cotangents (bounce-0 only).
struct SampleCot {
  Vec3 normal{0, 0, 0};
  double w = 0;
};

struct RayCotangent {
  Vec3 color_p{0, 0, 0};
  double reflprob = 0;  // on the ray's M
  double depth = 0;     // on the ray's expected depth
  const std::vector<SampleCot>* samples = nullptr;
};

// Single-field recursive forward that records every intermediate needed for
// an exact backward pass.  Matches trace() on a single-entry scene bitwise:
// same jitter streams, same gates, same arithmetic order.
void forward_records(const FieldParams& field, const Ray& ray, int max_depth,
                     int n, const Rng& ray_rng, const TraceParams& params,
                     RayRec& out);

// Reverse-mode walk of the record tree.  Accumulates parameter gradients
// into g and returns the cotangents of the node ray's origin and direction
// (zero for camera rays unless reflection chains feed them).
void backward_records(const FieldParams& field, const RayRec& node,
                      const RayCotangent& cot, GradientBuffers& g,
                      Vec3* origin_bar, Vec3* dir_bar);

}  // namespace mirrorfield
