#pragma once

#include <vector>

#include "roomfit/costs.hpp"

namespace roomfit {

// Levenberg-Marquardt schedule. Damping is one additive diagonal entry per
// cuboid parameter, scaled up/down as steps are rejected/accepted.
struct LMConfig {
  enum class Mode { fixed_iters, converge };

  Vec9 damping_init = Vec9::Constant(0.1);
  double damping_up = 10.0;
  double damping_down = 0.1;
  Mode mode = Mode::fixed_iters;
  int max_iters = 15;       // outer iterations (fixed mode) or cap (converge)
  double rel_tol = 1e-6;    // converge mode: relative cost decrease
  double step_tol = 1e-8;   // converge mode: step norm
  int max_retries = 10;     // damping bumps within one iteration
  double containment_margin = 0.1;  // meters, applied after accepted steps

  static LMConfig fixed(int iters = 15) {
    LMConfig c;
    c.mode = Mode::fixed_iters;
    c.max_iters = iters;
    return c;
  }
  static LMConfig converge(double rel = 1e-6, double step = 1e-8, int max = 100) {
    LMConfig c;
    c.mode = Mode::converge;
    c.rel_tol = rel;
    c.step_tol = step;
    c.max_iters = max;
    return c;
  }
};

struct ScaleResult {
  Cuboid cuboid;
  std::vector<double> cost_trajectory;  // cost before iteration 1, then after each iteration
  int iterations = 0;
  int accepted_steps = 0;
  bool solver_ok = true;  // false when the normal equations failed beyond damping rescue
};

struct FitResult {
  std::vector<ScaleResult> scales;  // coarse first
  bool success = true;              // all scales solver_ok

  const Cuboid& cuboid() const { return scales.back().cuboid; }
};

// Minimizes the composite cost at one pyramid level. Feature points are
// drawn once from rng; steps are accepted only when the cost decreases and
// the cuboid is re-expanded around the cameras after every accepted step.
ScaleResult lm_minimize(const Cuboid& c0, const Scene& scene, int level, const CostConfig& cost_cfg,
                        const LMConfig& lm_cfg, Rng& rng);

// Chains lm_minimize over the pyramid, each scale starting from the previous
// result. n_scales < 3 truncates the schedule (coarse-only ablation etc.).
FitResult coarse_to_fine(const Cuboid& c0, const Scene& scene, const CostConfig& cost_cfg,
                         const LMConfig& lm_cfg, Rng& rng, int n_scales = 3);

// RMS pixel error of warping ground-truth correspondences between all
// ordered image pairs, the fit-quality metric. Pairs where the warp fails
// are excluded; throws std::runtime_error when nothing warps.
double warp_error(const Cuboid& cub, const std::vector<Camera>& cams,
                  const std::vector<Correspondence>& gt);
double warp_error(const Cuboid& cub, const Scene& scene);

}  // namespace roomfit
