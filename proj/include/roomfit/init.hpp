#pragma once

#include "roomfit/scene.hpp"
#include "roomfit/solver.hpp"

namespace roomfit {

// Heuristic initialization: the cuboid z axis is the mean camera "up"
// (negative camera y), the in-plane axes are a seeded random orthonormal
// pair, and offsets contain every camera center with the given margin.
Cuboid init_from_cameras(const std::vector<Camera>& cams, double margin, Rng& rng);

// Ablation baseline: Haar-uniform orientation, same offset construction.
Cuboid init_random(const std::vector<Camera>& cams, double margin, Rng& rng);

// A few VP-only LM iterations to improve the initial orientation, then the
// offsets are recomputed so all cameras are contained with `margin` again.
// Returns the input (offsets recomputed) when the scene has no lines.
Cuboid vp_refine_init(const Cuboid& cub, const Scene& scene, int iters = 5, double margin = 2.5);

}  // namespace roomfit
