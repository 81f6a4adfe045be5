#include "roomfit/init.hpp"

#include <cmath>
#include <stdexcept>

namespace roomfit {

namespace {

// Offsets so every camera center sits >= margin inside, centered on the
// camera extents per axis.
Vec6 containment_offsets(const Mat3& R, const std::vector<Camera>& cams, double margin) {
  Vec6 d;
  for (int a = 0; a < 3; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Camera& cam : cams) {
      const double u = R.row(a).dot(cam.center());
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    d[2 * a] = lo - margin;
    d[2 * a + 1] = hi + margin;
  }
  return d;
}

Mat3 frame_from_z(const Vec3& z, Rng& rng) {
  // deterministic in-plane basis, then a seeded rotation angle
  int imin = 0;
  z.cwiseAbs().minCoeff(&imin);
  Vec3 seed = Vec3::Zero();
  seed[imin] = 1.0;
  const Vec3 b1 = (seed - seed.dot(z) * z).normalized();
  const Vec3 b2 = z.cross(b1);
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const Vec3 x = std::cos(theta) * b1 + std::sin(theta) * b2;
  const Vec3 y = z.cross(x);
  Mat3 R;
  R.row(0) = x;
  R.row(1) = y;
  R.row(2) = z;
  return R;
}

}  // namespace

Cuboid init_from_cameras(const std::vector<Camera>& cams, double margin, Rng& rng) {
  if (cams.empty()) throw std::invalid_argument("init_from_cameras: no cameras");
  Vec3 mean = Vec3::Zero();
  for (const Camera& cam : cams) mean -= cam.y_axis_world();
  Vec3 z = mean / cams.size();
  if (z.norm() < 1e-6) z = Vec3::UnitZ();  // all cameras pitched straight down/up
  z.normalize();

  Cuboid cub;
  cub.R = frame_from_z(z, rng);
  cub.d = containment_offsets(cub.R, cams, margin);
  return cub;
}

Cuboid init_random(const std::vector<Camera>& cams, double margin, Rng& rng) {
  if (cams.empty()) throw std::invalid_argument("init_random: no cameras");
  Cuboid cub;
  cub.R = rng.haar_quaternion().toRotationMatrix();
  cub.d = containment_offsets(cub.R, cams, margin);
  return cub;
}

Cuboid vp_refine_init(const Cuboid& cub, const Scene& scene, int iters, double margin) {
  Cuboid refined = cub;
  if (scene.has_lines() && iters > 0) {
    CostConfig vp_only;
    vp_only.use_feat = false;
    vp_only.use_edge = false;
    vp_only.use_vp = true;
    LMConfig lm = LMConfig::fixed(iters);
    Rng rng(0);  // no randomness consumed: feature sampling is off
    refined = lm_minimize(cub, scene, 0, vp_only, lm, rng).cuboid;
  }
  refined.d = containment_offsets(refined.R, scene.cameras(), margin);
  return refined;
}

}  // namespace roomfit
