#pragma once

#include <vector>

#include "roomfit/rng.hpp"
#include "roomfit/scene.hpp"

namespace roomfit {

// Weights and counts of the composite alignment cost
//   E = E_feat + alpha * E_edge + beta * E_vp,
// beta dropping to zero automatically when the scene carries no lines.
struct CostConfig {
  double alpha = 0.05;        // edge term weight
  double beta = 40.0;         // VP term weight
  double tau = 0.05;          // VP residual cap, normalized image coordinates
  double huber_scale = 1.0;   // robust-loss scale in feature units
  int points_per_image = 512; // featuremetric samples per image per level
  double gamma = 4.0;         // guided-sampling exponent
  int edge_points_per_edge = 40;
  bool use_feat = true;       // term toggles for ablations
  bool use_edge = true;
  bool use_vp = true;
};

enum class CostTerm { feat, edge, vp };

// Linearized residuals of one cost term. `values` are the raw residuals,
// `weights` the per-row confidence-times-IRLS factors; the term's cost is
// sum_i w_i v_i^2 and its Gauss-Newton pieces are J^T W J and J^T W v.
struct ResidualBlock {
  Eigen::VectorXd values;
  Eigen::MatrixXd jacobian;  // rows x 9, tangent order [rot(3); off(6)]
  Eigen::VectorXd weights;
  CostTerm term = CostTerm::feat;

  int rows() const { return static_cast<int>(values.size()); }
  double cost() const { return values.size() == 0 ? 0.0 : weights.dot(values.cwiseAbs2()); }
};

using PointSets = std::vector<std::vector<Vec2>>;

// Guided samples per image at one pyramid level, clamped to the number of
// positive-confidence pixels. Redrawn once per scale level, not per
// iteration, so a fit is a deterministic function of (scene, seed, configs).
PointSets draw_feature_points(const Scene& scene, int level, const CostConfig& cfg, Rng& rng);

// Multi-view featuremetric residuals over all ordered image pairs. Rows with
// failed warps, out-of-bounds lookups or zero confidence are omitted.
ResidualBlock featuremetric_block(const Cuboid& cub, const Scene& scene, int level,
                                  const PointSets& points, const CostConfig& cfg);

// Edge-map residuals at the projections of points sampled on the twelve
// cuboid edges.
ResidualBlock edge_block(const Cuboid& cub, const Scene& scene, int level,
                         const CostConfig& cfg);

// Distance between line endpoint l1 and the line through the segment
// midpoint and the vanishing point; +inf when that line is degenerate.
// Inputs are in normalized (intrinsics-removed) image coordinates.
double dvp(const LineSegment& line, const Vec3& vp);

// Capped min-over-VPs line residuals; Jacobian only w.r.t. rotation, zero
// rows for capped lines.
ResidualBlock vp_block(const Cuboid& cub, const Scene& scene, const CostConfig& cfg);

// beta, or zero when no frame carries line segments.
double effective_beta(const Scene& scene, const CostConfig& cfg);

struct CostBreakdown {
  double total = 0.0;
  double feat = 0.0, edge = 0.0, vp = 0.0;  // unweighted per-term costs
  ResidualBlock feat_block, edge_block, vp_block;
};

// Assembles all three terms with the given feature points.
CostBreakdown total_cost_with_points(const Cuboid& cub, const Scene& scene, int level,
                                     const PointSets& points, const CostConfig& cfg);

// One-shot evaluation: draws feature points from rng, then assembles.
CostBreakdown total_cost(const Cuboid& cub, const Scene& scene, int level, const CostConfig& cfg,
                         Rng& rng);

}  // namespace roomfit
