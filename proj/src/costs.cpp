#include "roomfit/costs.hpp"

#include <cmath>
#include <limits>

namespace roomfit {

namespace {

// IRLS factor of the Huber-style loss rho(||r||^2) = min(||r||^2, s*||r||):
// weighting each squared residual by min(1, s/||r||) reproduces rho exactly.
double huber_factor(double norm, double scale) {
  if (scale <= 0.0 || norm <= scale) return 1.0;
  return scale / norm;
}

struct RowBuffer {
  std::vector<double> values;
  std::vector<double> weights;
  std::vector<Eigen::Matrix<double, 1, 9>> jac;

  void push(double v, double w, const Eigen::Matrix<double, 1, 9>& j) {
    values.push_back(v);
    weights.push_back(w);
    jac.push_back(j);
  }

  ResidualBlock finish(CostTerm term) const {
    ResidualBlock b;
    b.term = term;
    const int n = static_cast<int>(values.size());
    b.values.resize(n);
    b.weights.resize(n);
    b.jacobian.resize(n, 9);
    for (int i = 0; i < n; ++i) {
      b.values[i] = values[i];
      b.weights[i] = weights[i];
      b.jacobian.row(i) = jac[i];
    }
    return b;
  }
};

Camera level_camera(const Frame& frame, int level) {
  const LevelMaps& lm = frame.pyramid.levels[level];
  return frame.camera.scaled(lm.width(), lm.height());
}

}  // namespace

PointSets draw_feature_points(const Scene& scene, int level, const CostConfig& cfg, Rng& rng) {
  PointSets out(scene.frames.size());
  if (!cfg.use_feat) return out;
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const DenseGrid& conf = scene.frames[i].pyramid.levels[level].feat_conf;
    int positive = 0;
    for (float c : conf.data())
      if (c > 0.0f) ++positive;
    const int k = std::min(cfg.points_per_image, positive);
    if (k == 0) continue;
    for (const auto& px : guided_sample(conf, k, cfg.gamma, rng))
      out[i].emplace_back(static_cast<double>(px.x()), static_cast<double>(px.y()));
  }
  return out;
}

ResidualBlock featuremetric_block(const Cuboid& cub, const Scene& scene, int level,
                                  const PointSets& points, const CostConfig& cfg) {
  RowBuffer rows;
  if (!cfg.use_feat || scene.frames.empty()) return rows.finish(CostTerm::feat);

  const int n = static_cast<int>(scene.frames.size());
  std::vector<Camera> cams(n);
  for (int i = 0; i < n; ++i) cams[i] = level_camera(scene.frames[i], level);

  const int D = scene.frames[0].pyramid.levels[level].features.channels();
  std::vector<double> fi(D), fj(D), gx(D), gy(D);
  double ci, cj;

  for (int i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(i) >= points.size()) break;
    const LevelMaps& maps_i = scene.frames[i].pyramid.levels[level];
    for (const Vec2& x : points[i]) {
      if (!bilinear_sample_into(maps_i.features, x, fi.data())) continue;
      if (!bilinear_sample_into(maps_i.feat_conf, x, &ci)) continue;
      if (ci <= 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto w = warp_with_jacobian(cub, cams[i], cams[j], x);
        if (!w) continue;
        const LevelMaps& maps_j = scene.frames[j].pyramid.levels[level];
        if (!bilinear_sample_into(maps_j.features, w->pixel, fj.data())) continue;
        if (!bilinear_sample_into(maps_j.feat_conf, w->pixel, &cj)) continue;
        const double conf = ci * cj;
        if (conf <= 0.0) continue;
        if (!bilinear_gradient_into(maps_j.features, w->pixel, gx.data(), gy.data())) continue;

        double sq = 0.0;
        for (int c = 0; c < D; ++c) {
          const double r = fi[c] - fj[c];
          sq += r * r;
        }
        const double weight = conf * huber_factor(std::sqrt(sq), cfg.huber_scale);
        for (int c = 0; c < D; ++c) {
          // dr/ddelta = -grad F_j(warped) * dwarp/ddelta
          const Eigen::Matrix<double, 1, 9> jrow =
              -(gx[c] * w->jacobian.row(0) + gy[c] * w->jacobian.row(1));
          rows.push(fi[c] - fj[c], weight, jrow);
        }
      }
    }
  }
  return rows.finish(CostTerm::feat);
}

ResidualBlock edge_block(const Cuboid& cub, const Scene& scene, int level, const CostConfig& cfg) {
  RowBuffer rows;
  if (!cfg.use_edge || scene.frames.empty()) return rows.finish(CostTerm::edge);

  const auto samples = sample_edge_points_detailed(cub, cfg.edge_points_per_edge);
  double e, ce, gx, gy;
  for (const Frame& frame : scene.frames) {
    const Camera cam = level_camera(frame, level);
    const LevelMaps& maps = frame.pyramid.levels[level];
    for (const EdgeSample& s : samples) {
      const Vec3 Xc = cam.R * s.world + cam.t;
      if (Xc.z() <= 1e-6) continue;
      const Vec2 px(cam.fx * Xc.x() / Xc.z() + cam.cx, cam.fy * Xc.y() / Xc.z() + cam.cy);
      if (!bilinear_sample_into(maps.edge, px, &e)) continue;
      if (!bilinear_sample_into(maps.edge_conf, px, &ce)) continue;
      if (ce <= 0.0) continue;
      if (!bilinear_gradient_into(maps.edge, px, &gx, &gy)) continue;

      const double z = Xc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << cam.fx / z, 0, -cam.fx * Xc.x() / (z * z), 0, cam.fy / z, -cam.fy * Xc.y() / (z * z);
      const Eigen::Matrix<double, 1, 9> jrow =
          Eigen::Matrix<double, 1, 2>(gx, gy) * dpi * cam.R * edge_point_jacobian(cub, s);
      rows.push(e, ce, jrow);
    }
  }
  return rows.finish(CostTerm::edge);
}

double dvp(const LineSegment& line, const Vec3& vp) {
  const Vec2 mid = line.midpoint();
  const Vec3 lhat = Vec3(mid.x(), mid.y(), 1.0).cross(vp);
  const double norm = std::sqrt(lhat.x() * lhat.x() + lhat.y() * lhat.y());
  if (norm < 1e-12) return std::numeric_limits<double>::infinity();
  const Vec3 l1(line.p1.x(), line.p1.y(), 1.0);
  return std::abs(lhat.dot(l1)) / norm;
}

ResidualBlock vp_block(const Cuboid& cub, const Scene& scene, const CostConfig& cfg) {
  RowBuffer rows;
  if (!cfg.use_vp) return rows.finish(CostTerm::vp);

  for (const Frame& frame : scene.frames) {
    if (frame.lines.empty()) continue;
    const Camera& cam = frame.camera;
    const Mat3 M = cam.R * cub.R.transpose();  // raw VP directions, no sign canonicalization

    for (const LineSegment& pix_line : frame.lines) {
      LineSegment line;  // normalized coordinates
      line.p1 = Vec2((pix_line.p1.x() - cam.cx) / cam.fx, (pix_line.p1.y() - cam.cy) / cam.fy);
      line.p2 = Vec2((pix_line.p2.x() - cam.cx) / cam.fx, (pix_line.p2.y() - cam.cy) / cam.fy);

      int best_k = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double d = dvp(line, M.col(k));
        if (d < best_d) {
          best_d = d;
          best_k = k;
        }
      }

      if (!(best_d < cfg.tau)) {
        // capped: constant residual, no gradient
        rows.push(cfg.tau, 1.0, Eigen::Matrix<double, 1, 9>::Zero());
        continue;
      }

      // d D / d rot through v_k(rot) = R_i R^T exp(-[rot]x) e_k.
      const Vec3 v = M.col(best_k);
      const Vec2 mid = line.midpoint();
      const Vec3 lbar(mid.x(), mid.y(), 1.0);
      const Vec3 lhat = lbar.cross(v);
      const double m2 = lhat.x() * lhat.x() + lhat.y() * lhat.y();
      const double m = std::sqrt(m2);
      const Vec3 l1(line.p1.x(), line.p1.y(), 1.0);
      const double s = lhat.dot(l1);
      const double sgn = s >= 0 ? 1.0 : -1.0;
      const Eigen::RowVector3d dD_dlhat =
          sgn * l1.transpose() / m -
          std::abs(s) / (m2 * m) * Eigen::RowVector3d(lhat.x(), lhat.y(), 0.0);
      Vec3 ek = Vec3::Zero();
      ek[best_k] = 1.0;
      const Eigen::RowVector3d dD_drot = dD_dlhat * skew(lbar) * M * skew(ek);

      Eigen::Matrix<double, 1, 9> jrow = Eigen::Matrix<double, 1, 9>::Zero();
      jrow.head<3>() = dD_drot;
      rows.push(best_d, 1.0, jrow);
    }
  }
  return rows.finish(CostTerm::vp);
}

double effective_beta(const Scene& scene, const CostConfig& cfg) {
  return scene.has_lines() ? cfg.beta : 0.0;
}

CostBreakdown total_cost_with_points(const Cuboid& cub, const Scene& scene, int level,
                                     const PointSets& points, const CostConfig& cfg) {
  CostBreakdown out;
  out.feat_block = featuremetric_block(cub, scene, level, points, cfg);
  out.edge_block = edge_block(cub, scene, level, cfg);
  out.vp_block = vp_block(cub, scene, cfg);
  out.feat = out.feat_block.cost();
  out.edge = out.edge_block.cost();
  out.vp = out.vp_block.cost();
  out.total = out.feat + cfg.alpha * out.edge + effective_beta(scene, cfg) * out.vp;
  return out;
}

CostBreakdown total_cost(const Cuboid& cub, const Scene& scene, int level, const CostConfig& cfg,
                         Rng& rng) {
  const PointSets points = draw_feature_points(scene, level, cfg, rng);
  return total_cost_with_points(cub, scene, level, points, cfg);
}

}  // namespace roomfit
