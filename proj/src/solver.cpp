#include "roomfit/solver.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace roomfit {

namespace {

struct NormalEquations {
  Eigen::Matrix<double, 9, 9> H = Eigen::Matrix<double, 9, 9>::Zero();
  Vec9 g = Vec9::Zero();

  void add(const ResidualBlock& block, double term_weight) {
    if (block.rows() == 0 || term_weight == 0.0) return;
    for (int i = 0; i < block.rows(); ++i) {
      const double w = term_weight * block.weights[i];
      if (w == 0.0) continue;
      const auto j = block.jacobian.row(i);
      H.noalias() += w * j.transpose() * j;
      g.noalias() += w * block.values[i] * j.transpose();
    }
  }
};

constexpr double kLambdaMin = 1e-12;
constexpr double kLambdaMax = 1e32;

}  // namespace

ScaleResult lm_minimize(const Cuboid& c0, const Scene& scene, int level, const CostConfig& cost_cfg,
                        const LMConfig& lm_cfg, Rng& rng) {
  ScaleResult res;
  res.cuboid = expand_to_contain(c0, scene.cameras(), lm_cfg.containment_margin);

  const PointSets points = draw_feature_points(scene, level, cost_cfg, rng);
  const double beta = effective_beta(scene, cost_cfg);

  CostBreakdown current = total_cost_with_points(res.cuboid, scene, level, points, cost_cfg);
  res.cost_trajectory.push_back(current.total);

  Vec9 lambda = lm_cfg.damping_init;
  bool any_solve_ok = false;
  bool any_solve_attempted = false;

  for (int iter = 0; iter < lm_cfg.max_iters; ++iter) {
    res.iterations = iter + 1;

    NormalEquations ne;
    ne.add(current.feat_block, 1.0);
    ne.add(current.edge_block, cost_cfg.alpha);
    ne.add(current.vp_block, beta);

    bool accepted = false;
    double step_norm = 0.0;
    for (int retry = 0; retry < lm_cfg.max_retries; ++retry) {
      any_solve_attempted = true;
      Eigen::Matrix<double, 9, 9> A = ne.H;
      A.diagonal() += lambda;
      const Eigen::LLT<Eigen::Matrix<double, 9, 9>> llt(A);
      if (llt.info() != Eigen::Success) {
        lambda = (lambda * lm_cfg.damping_up).cwiseMin(kLambdaMax);
        continue;
      }
      const Vec9 delta = llt.solve(-ne.g);
      if (!delta.allFinite()) {
        lambda = (lambda * lm_cfg.damping_up).cwiseMin(kLambdaMax);
        continue;
      }
      any_solve_ok = true;

      const auto candidate = try_retract(res.cuboid, CuboidTangent::from_stacked(delta));
      if (candidate) {
        const CostBreakdown cand_cost =
            total_cost_with_points(*candidate, scene, level, points, cost_cfg);
        if (cand_cost.total < current.total) {
          const Cuboid expanded =
              expand_to_contain(*candidate, scene.cameras(), lm_cfg.containment_margin);
          if ((expanded.d - candidate->d).cwiseAbs().maxCoeff() > 0.0) {
            res.cuboid = expanded;
            current = total_cost_with_points(expanded, scene, level, points, cost_cfg);
          } else {
            res.cuboid = *candidate;
            current = cand_cost;
          }
          lambda = (lambda * lm_cfg.damping_down).cwiseMax(kLambdaMin);
          accepted = true;
          ++res.accepted_steps;
          step_norm = delta.norm();
          break;
        }
      }
      lambda = (lambda * lm_cfg.damping_up).cwiseMin(kLambdaMax);
    }

    res.cost_trajectory.push_back(current.total);

    if (lm_cfg.mode == LMConfig::Mode::converge) {
      if (!accepted) break;
      const double prev = res.cost_trajectory[res.cost_trajectory.size() - 2];
      if (prev - current.total < lm_cfg.rel_tol * std::max(prev, 1e-300)) break;
      if (step_norm < lm_cfg.step_tol) break;
    }
  }

  res.solver_ok = !any_solve_attempted || any_solve_ok;
  return res;
}

FitResult coarse_to_fine(const Cuboid& c0, const Scene& scene, const CostConfig& cost_cfg,
                         const LMConfig& lm_cfg, Rng& rng, int n_scales) {
  if (n_scales < 1 || n_scales > 3)
    throw std::invalid_argument("coarse_to_fine: n_scales must be in [1, 3]");
  FitResult out;
  Cuboid current = c0;
  for (int level = 0; level < n_scales; ++level) {
    ScaleResult sr = lm_minimize(current, scene, level, cost_cfg, lm_cfg, rng);
    current = sr.cuboid;  // continue from the last valid cuboid even on failure
    out.success = out.success && sr.solver_ok;
    out.scales.push_back(std::move(sr));
  }
  return out;
}

double warp_error(const Cuboid& cub, const std::vector<Camera>& cams,
                  const std::vector<Correspondence>& gt) {
  double sum_sq = 0.0;
  long n = 0;
  for (const Correspondence& c : gt) {
    if (c.image < 0 || c.image >= static_cast<int>(cams.size()))
      throw std::invalid_argument("warp_error: correspondence image index out of range");
    for (std::size_t j = 0; j < cams.size(); ++j) {
      if (static_cast<int>(j) == c.image) continue;
      const auto warped = warp(cub, cams[c.image], cams[j], c.pixel);
      if (!warped) continue;
      const auto target = project(cams[j], c.point);
      if (!target) continue;
      sum_sq += (*warped - *target).squaredNorm();
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("warp_error: no correspondence warped successfully");
  return std::sqrt(sum_sq / n);
}

double warp_error(const Cuboid& cub, const Scene& scene) {
  return warp_error(cub, scene.cameras(), scene.gt_correspondences);
}

}  // namespace roomfit
