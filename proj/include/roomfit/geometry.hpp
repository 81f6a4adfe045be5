#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace roomfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat29 = Eigen::Matrix<double, 2, 9>;
using Mat39 = Eigen::Matrix<double, 3, 9>;

// Face indices: 0 = x_lo, 1 = x_hi, 2 = y_lo, 3 = y_hi, 4 = z_lo, 5 = z_hi.
// Axis of face f is f / 2; the face is a high face iff f is odd.

// Oriented box with 9 degrees of freedom. u = R * X maps world points into
// the cuboid-axis frame; face f of axis a satisfies u[a] = d[f]. Translation
// is carried by the offsets, there is no separate position parameter.
struct Cuboid {
  Mat3 R = Mat3::Identity();
  Vec6 d = (Vec6() << -1, 1, -1, 1, -1, 1).finished();

  // Throws std::invalid_argument if R is not a proper rotation (1e-9) or any
  // axis has non-positive extent.
  void validate() const;
  bool is_valid() const;

  Vec3 axis(int a) const { return R.row(a).transpose(); }  // world direction of cuboid axis a
  double extent(int a) const { return d[2 * a + 1] - d[2 * a]; }
  double volume() const { return extent(0) * extent(1) * extent(2); }
  Vec3 center_world() const;
  std::array<Vec3, 8> corners_world() const;
  bool contains(const Vec3& X, double margin = 0.0) const;
};

// Pinhole camera, x right / y down / z forward, X_cam = R * X + t.
// Integer pixel coordinates sit at pixel centers.
struct Camera {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double fx = 1, fy = 1, cx = 0, cy = 0;
  int width = 1, height = 1;

  void validate() const;
  Vec3 center() const { return -R.transpose() * t; }
  Vec3 y_axis_world() const { return R.row(1).transpose(); }

  // Same pose, intrinsics remapped onto a grid resampled to new_w x new_h.
  Camera scaled(int new_w, int new_h) const;
};

// Tangent step on SO(3) x R^6: axis-angle rotation increment plus offset
// increments. Stacked order is [rot; off] everywhere Jacobians appear.
struct CuboidTangent {
  Vec3 rot = Vec3::Zero();
  Vec6 off = Vec6::Zero();

  Vec9 stacked() const;
  static CuboidTangent from_stacked(const Vec9& v);
};

struct FaceHit {
  Vec3 point;     // world, on the face plane
  int face = -1;  // 0..5
  double depth = 0.0;  // meters along the (unit) ray, > 0
};

// Point on one of the twelve edges, kept with its parameterization so costs
// can differentiate the point w.r.t. the cuboid.
struct EdgeSample {
  Vec3 world;
  int free_axis;   // axis the edge runs along
  double t01;      // position along the edge in [0,1]
  int face_b;      // pinned face index on the second axis
  int face_c;      // pinned face index on the third axis
};

Mat3 skew(const Vec3& w);
// Rodrigues exponential, safe for small angles.
Mat3 rotation_exp(const Vec3& w);

// Pinhole projection; nullopt when the point is behind the camera
// (z <= 1e-6 m). Out-of-image points are still returned.
std::optional<Vec2> project(const Camera& cam, const Vec3& X);

// First cuboid face crossed by the ray. Expects the origin inside the box
// (the unique exit face is returned); nullopt when no valid hit exists or
// the hit grazes an edge (within 1e-7 of a second face), which is ambiguous.
std::optional<FaceHit> raycast_cuboid(const Cuboid& cub, const Vec3& origin, const Vec3& dir);

// Pixel of image i -> ray from camera i -> cuboid face -> pixel of image j.
// nullopt when the raycast fails, the point is behind camera j, or it lands
// outside [0,W) x [0,H) of image j.
std::optional<Vec2> warp(const Cuboid& cub, const Camera& cam_i, const Camera& cam_j, const Vec2& x);

// d(warp)/d(tangent) at the current cuboid, 2x9. Only defined where warp is.
std::optional<Mat29> warp_jacobian(const Cuboid& cub, const Camera& cam_i, const Camera& cam_j,
                                   const Vec2& x);

struct WarpResult {
  Vec2 pixel;
  FaceHit hit;
  Mat29 jacobian;
};

// One-pass warp + Jacobian for residual assembly.
std::optional<WarpResult> warp_with_jacobian(const Cuboid& cub, const Camera& cam_i,
                                             const Camera& cam_j, const Vec2& x);

// Left-multiplicative retraction: R <- exp([rot]x) R, d <- d + off.
// nullopt when the result would have a non-positive extent.
std::optional<Cuboid> try_retract(const Cuboid& cub, const CuboidTangent& delta);
// Throwing variant of try_retract.
Cuboid retract(const Cuboid& cub, const CuboidTangent& delta);

// Columns of R_cam * R^T, unit length, sign-canonicalized so the
// largest-magnitude entry of each is positive.
std::array<Vec3, 3> vanishing_points(const Cuboid& cub, const Camera& cam);

// Grow offsets so every camera center is at least `margin` from every face.
// Never shrinks.
Cuboid expand_to_contain(const Cuboid& cub, std::span<const Camera> cams, double margin);

// n_per_edge points per edge at parameters (k + 0.5) / n.
std::vector<Vec3> sample_edge_points(const Cuboid& cub, int n_per_edge);
std::vector<EdgeSample> sample_edge_points_detailed(const Cuboid& cub, int n_per_edge);

// d(edge point)/d(tangent): the point rides its two pinned faces and
// stretches along the free axis, 3x9.
Mat39 edge_point_jacobian(const Cuboid& cub, const EdgeSample& s);

// The 24 proper rotations of the cube (signed permutation matrices).
const std::array<Mat3, 24>& box_rotation_group();

// Re-expresses the same box under symmetry S: R' = S R with offsets permuted
// and sign-flipped to keep d_lo < d_hi.
Cuboid apply_box_symmetry(const Cuboid& cub, const Mat3& S);

}  // namespace roomfit
