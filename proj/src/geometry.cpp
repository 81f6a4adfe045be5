#include "roomfit/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace roomfit {

namespace {

constexpr double kRayEps = 1e-9;       // minimum hit distance
constexpr double kFaceEps = 1e-7;      // face rectangle tolerance / edge-grazing band
constexpr double kBehindEps = 1e-6;    // projection z cutoff

bool is_rotation(const Mat3& R, double tol) {
  return (R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

}  // namespace

void Cuboid::validate() const {
  if (!R.allFinite() || !d.allFinite()) throw std::invalid_argument("cuboid: non-finite entries");
  if (!is_rotation(R, 1e-9)) throw std::invalid_argument("cuboid: R is not a proper rotation");
  for (int a = 0; a < 3; ++a)
    if (!(d[2 * a] < d[2 * a + 1])) throw std::invalid_argument("cuboid: non-positive extent");
}

bool Cuboid::is_valid() const {
  if (!R.allFinite() || !d.allFinite() || !is_rotation(R, 1e-9)) return false;
  for (int a = 0; a < 3; ++a)
    if (!(d[2 * a] < d[2 * a + 1])) return false;
  return true;
}

Vec3 Cuboid::center_world() const {
  Vec3 u(0.5 * (d[0] + d[1]), 0.5 * (d[2] + d[3]), 0.5 * (d[4] + d[5]));
  return R.transpose() * u;
}

std::array<Vec3, 8> Cuboid::corners_world() const {
  std::array<Vec3, 8> out;
  int k = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l)
        out[k++] = R.transpose() * Vec3(d[i], d[2 + j], d[4 + l]);
  return out;
}

bool Cuboid::contains(const Vec3& X, double margin) const {
  Vec3 u = R * X;
  for (int a = 0; a < 3; ++a)
    if (u[a] < d[2 * a] + margin || u[a] > d[2 * a + 1] - margin) return false;
  return true;
}

void Camera::validate() const {
  if (!R.allFinite() || !t.allFinite()) throw std::invalid_argument("camera: non-finite pose");
  if (!is_rotation(R, 1e-9)) throw std::invalid_argument("camera: R is not a proper rotation");
  if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("camera: focal lengths must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("camera: bad image size");
}

Camera Camera::scaled(int new_w, int new_h) const {
  const double sx = static_cast<double>(new_w) / width;
  const double sy = static_cast<double>(new_h) / height;
  Camera c = *this;
  c.fx = fx * sx;
  c.fy = fy * sy;
  c.cx = (cx + 0.5) * sx - 0.5;  // pixel centers at integers
  c.cy = (cy + 0.5) * sy - 0.5;
  c.width = new_w;
  c.height = new_h;
  return c;
}

Vec9 CuboidTangent::stacked() const {
  Vec9 v;
  v.head<3>() = rot;
  v.tail<6>() = off;
  return v;
}

CuboidTangent CuboidTangent::from_stacked(const Vec9& v) {
  CuboidTangent d;
  d.rot = v.head<3>();
  d.off = v.tail<6>();
  return d;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Mat3 rotation_exp(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (theta2 < 1e-16) {
    // second-order Taylor, exact enough below sqrt eps
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double theta = std::sqrt(theta2);
  return Mat3::Identity() + (std::sin(theta) / theta) * W +
         ((1.0 - std::cos(theta)) / theta2) * W * W;
}

std::optional<Vec2> project(const Camera& cam, const Vec3& X) {
  const Vec3 Xc = cam.R * X + cam.t;
  if (Xc.z() <= kBehindEps) return std::nullopt;
  return Vec2(cam.fx * Xc.x() / Xc.z() + cam.cx, cam.fy * Xc.y() / Xc.z() + cam.cy);
}

std::optional<FaceHit> raycast_cuboid(const Cuboid& cub, const Vec3& origin, const Vec3& dir) {
  const Vec3 uo = cub.R * origin;
  const Vec3 ud = cub.R * dir;

  FaceHit best;
  double best_t = std::numeric_limits<double>::infinity();
  for (int f = 0; f < 6; ++f) {
    const int a = f / 2;
    if (std::abs(ud[a]) < 1e-15) continue;
    const double t = (cub.d[f] - uo[a]) / ud[a];
    if (t <= kRayEps || t >= best_t) continue;
    bool inside = true;
    for (int b = 0; b < 3; ++b) {
      if (b == a) continue;
      const double ub = uo[b] + t * ud[b];
      if (ub < cub.d[2 * b] - kFaceEps || ub > cub.d[2 * b + 1] + kFaceEps) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    best_t = t;
    best.face = f;
    best.depth = t;
  }
  if (!std::isfinite(best_t)) return std::nullopt;

  best.point = origin + best_t * dir;
  // Grazing hits that touch a second face within 1e-7 are ambiguous: drop.
  const Vec3 up = uo + best_t * ud;
  for (int b = 0; b < 3; ++b) {
    if (b == best.face / 2) continue;
    if (std::abs(up[b] - cub.d[2 * b]) < kFaceEps || std::abs(up[b] - cub.d[2 * b + 1]) < kFaceEps)
      return std::nullopt;
  }
  return best;
}

namespace {

// Unit world-frame direction of the viewing ray through pixel x of cam.
Vec3 pixel_ray_world(const Camera& cam, const Vec2& x) {
  const Vec3 dir_cam((x.x() - cam.cx) / cam.fx, (x.y() - cam.cy) / cam.fy, 1.0);
  return (cam.R.transpose() * dir_cam).normalized();
}

bool in_image(const Camera& cam, const Vec2& p) {
  return p.x() >= 0.0 && p.x() < cam.width && p.y() >= 0.0 && p.y() < cam.height;
}

}  // namespace

std::optional<Vec2> warp(const Cuboid& cub, const Camera& cam_i, const Camera& cam_j,
                         const Vec2& x) {
  const Vec3 origin = cam_i.center();
  const auto hit = raycast_cuboid(cub, origin, pixel_ray_world(cam_i, x));
  if (!hit) return std::nullopt;
  const auto p = project(cam_j, hit->point);
  if (!p || !in_image(cam_j, *p)) return std::nullopt;
  return p;
}

std::optional<WarpResult> warp_with_jacobian(const Cuboid& cub, const Camera& cam_i,
                                             const Camera& cam_j, const Vec2& x) {
  const Vec3 origin = cam_i.center();
  const Vec3 v = pixel_ray_world(cam_i, x);
  const auto hit = raycast_cuboid(cub, origin, v);
  if (!hit) return std::nullopt;

  const Vec3 Xc = cam_j.R * hit->point + cam_j.t;
  if (Xc.z() <= kBehindEps) return std::nullopt;
  const Vec2 pixel(cam_j.fx * Xc.x() / Xc.z() + cam_j.cx, cam_j.fy * Xc.y() / Xc.z() + cam_j.cy);
  if (!in_image(cam_j, pixel)) return std::nullopt;

  // Plane of the hit face: n^T X = d_f with n = R^T e_a. A tangent step
  // moves only the hit distance t along the fixed ray:
  //   dt/d(d_f)  = 1 / (n.v)
  //   dt/d(rot)  = -P^T R^T [e_a]x / (n.v)
  // so dP/ddelta = v * dt/ddelta is rank one.
  const int f = hit->face;
  const int a = f / 2;
  const Vec3 n = cub.R.row(a).transpose();
  const double nv = n.dot(v);
  if (std::abs(nv) < 1e-15) return std::nullopt;

  Eigen::Matrix<double, 1, 9> dt = Eigen::Matrix<double, 1, 9>::Zero();
  Vec3 ea = Vec3::Zero();
  ea[a] = 1.0;
  dt.head<3>() = (-hit->point.transpose() * cub.R.transpose() * skew(ea)) / nv;
  dt[3 + f] = 1.0 / nv;

  const double z = Xc.z();
  Eigen::Matrix<double, 2, 3> dpi;
  dpi << cam_j.fx / z, 0, -cam_j.fx * Xc.x() / (z * z), 0, cam_j.fy / z,
      -cam_j.fy * Xc.y() / (z * z);
  const Vec2 lhs = dpi * (cam_j.R * v);

  WarpResult out;
  out.pixel = pixel;
  out.hit = *hit;
  out.jacobian = lhs * dt;
  return out;
}

std::optional<Mat29> warp_jacobian(const Cuboid& cub, const Camera& cam_i, const Camera& cam_j,
                                   const Vec2& x) {
  const auto r = warp_with_jacobian(cub, cam_i, cam_j, x);
  if (!r) return std::nullopt;
  return r->jacobian;
}

std::optional<Cuboid> try_retract(const Cuboid& cub, const CuboidTangent& delta) {
  Cuboid out;
  out.R = rotation_exp(delta.rot) * cub.R;
  out.d = cub.d + delta.off;
  for (int a = 0; a < 3; ++a)
    if (!(out.d[2 * a] < out.d[2 * a + 1])) return std::nullopt;
  return out;
}

Cuboid retract(const Cuboid& cub, const CuboidTangent& delta) {
  auto out = try_retract(cub, delta);
  if (!out) throw std::invalid_argument("retract: step collapses a cuboid extent");
  return *out;
}

std::array<Vec3, 3> vanishing_points(const Cuboid& cub, const Camera& cam) {
  const Mat3 M = cam.R * cub.R.transpose();
  std::array<Vec3, 3> vps;
  for (int k = 0; k < 3; ++k) {
    Vec3 v = M.col(k).normalized();
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    vps[k] = v;
  }
  return vps;
}

Cuboid expand_to_contain(const Cuboid& cub, std::span<const Camera> cams, double margin) {
  Cuboid out = cub;
  for (const Camera& cam : cams) {
    const Vec3 u = cub.R * cam.center();
    for (int a = 0; a < 3; ++a) {
      out.d[2 * a] = std::min(out.d[2 * a], u[a] - margin);
      out.d[2 * a + 1] = std::max(out.d[2 * a + 1], u[a] + margin);
    }
  }
  return out;
}

std::vector<EdgeSample> sample_edge_points_detailed(const Cuboid& cub, int n_per_edge) {
  std::vector<EdgeSample> out;
  out.reserve(12 * static_cast<std::size_t>(n_per_edge));
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    for (int sb = 0; sb < 2; ++sb) {
      for (int sc = 0; sc < 2; ++sc) {
        for (int k = 0; k < n_per_edge; ++k) {
          EdgeSample s;
          s.free_axis = a;
          s.t01 = (k + 0.5) / n_per_edge;
          s.face_b = 2 * b + sb;
          s.face_c = 2 * c + sc;
          Vec3 u;
          u[a] = (1.0 - s.t01) * cub.d[2 * a] + s.t01 * cub.d[2 * a + 1];
          u[b] = cub.d[s.face_b];
          u[c] = cub.d[s.face_c];
          s.world = cub.R.transpose() * u;
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

std::vector<Vec3> sample_edge_points(const Cuboid& cub, int n_per_edge) {
  std::vector<Vec3> out;
  const auto detailed = sample_edge_points_detailed(cub, n_per_edge);
  out.reserve(detailed.size());
  for (const auto& s : detailed) out.push_back(s.world);
  return out;
}

Mat39 edge_point_jacobian(const Cuboid& cub, const EdgeSample& s) {
  const Vec3 u = cub.R * s.world;
  Mat39 J = Mat39::Zero();
  J.block<3, 3>(0, 0) = cub.R.transpose() * skew(u);

  const int a = s.free_axis;
  const Vec3 col_a = cub.R.row(a).transpose();  // R^T e_a
  J.col(3 + 2 * a) = (1.0 - s.t01) * col_a;
  J.col(3 + 2 * a + 1) = s.t01 * col_a;
  J.col(3 + s.face_b) = cub.R.row(s.face_b / 2).transpose();
  J.col(3 + s.face_c) = cub.R.row(s.face_c / 2).transpose();
  return J;
}

const std::array<Mat3, 24>& box_rotation_group() {
  static const std::array<Mat3, 24> group = [] {
    std::array<Mat3, 24> g;
    int n = 0;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
      for (int s0 = -1; s0 <= 1; s0 += 2) {
        for (int s1 = -1; s1 <= 1; s1 += 2) {
          for (int s2 = -1; s2 <= 1; s2 += 2) {
            Mat3 S = Mat3::Zero();
            S(0, p[0]) = s0;
            S(1, p[1]) = s1;
            S(2, p[2]) = s2;
            if (S.determinant() > 0.5) g[n++] = S;
          }
        }
      }
    }
    return g;
  }();
  return group;
}

Cuboid apply_box_symmetry(const Cuboid& cub, const Mat3& S) {
  Cuboid out;
  out.R = S * cub.R;
  for (int a = 0; a < 3; ++a) {
    int p = 0;
    double sign = 0;
    for (int j = 0; j < 3; ++j) {
      if (std::abs(S(a, j)) > 0.5) {
        p = j;
        sign = S(a, j);
      }
    }
    if (sign > 0) {
      out.d[2 * a] = cub.d[2 * p];
      out.d[2 * a + 1] = cub.d[2 * p + 1];
    } else {
      out.d[2 * a] = -cub.d[2 * p + 1];
      out.d[2 * a + 1] = -cub.d[2 * p];
    }
  }
  return out;
}

}  // namespace roomfit
