#pragma once

#include <map>
#include <optional>
#include <vector>

#include "roomfit/densemaps.hpp"
#include "roomfit/geometry.hpp"
#include "roomfit/scene.hpp"

namespace roomfit {

struct MetricsReport {
  double iou = 0.0;                 // [0, 1]
  double chamfer_m = 0.0;           // meters
  double rot_deg = 0.0;             // symmetry-aware rotation error, degrees
  std::map<double, double> auc;     // threshold (deg) -> AUC in [0, 100]
  double depth_rmse_m = 0.0;        // meters
  double normal_pct = 0.0;          // % of pixels with normal error < 10 deg
  std::optional<bool> success;      // warp error < 3 px, when measurable
};

// Exact intersection-over-union of two oriented boxes via half-space
// clipping of the vertex polyhedron; no sampling.
double iou3d(const Cuboid& a, const Cuboid& b);

// Symmetric mean surface-to-surface distance: n points sampled
// area-uniformly on each box, exact point-to-box distance to the other.
// Each box's sample substream is derived from (seed, its parameters), so the
// value is invariant under argument swap.
double chamfer(const Cuboid& a, const Cuboid& b, int n_samples = 10000, std::uint64_t seed = 0);

// Smallest rotation angle between the two cuboid frames over the 24 proper
// rotations of the cube, degrees.
double rotation_error_deg(const Cuboid& a, const Cuboid& b);

// Area under the recall curve of `errors` over thresholds [0, threshold],
// exact piecewise-constant integration, scaled to [0, 100].
double auc_recall(const std::vector<double>& errors_deg, double threshold_deg);

struct RenderedView {
  DenseGrid depth;               // 1 channel, camera-frame z in meters; 0 where invalid
  DenseGrid normal;              // 3 channels, world-frame outward unit normal
  std::vector<std::uint8_t> valid;  // row-major hit mask

  bool is_valid(int y, int x) const { return valid[static_cast<std::size_t>(y) * depth.width() + x] != 0; }
};

// Per-pixel raycast of the layout; pixels that miss (camera outside the box)
// are marked invalid.
RenderedView render_layout(const Cuboid& cub, const Camera& cam);

// Depth RMSE and percentage of pixels with normal angle error < 10 degrees,
// over pixels valid in both renders, averaged over views. Throws
// std::runtime_error if no view has mutually valid pixels.
std::pair<double, double> depth_normal_metrics(const Cuboid& pred, const Cuboid& gt,
                                               const std::vector<Camera>& cams);

// Full report for one prediction. `success` is set iff correspondences are
// provided (warp RMS < 3 px).
MetricsReport evaluate(const Cuboid& pred, const Cuboid& gt, const std::vector<Camera>& cams,
                       const std::vector<Correspondence>& gt_correspondences = {});

}  // namespace roomfit
