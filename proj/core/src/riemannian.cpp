#include "manisolve/riemannian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "manisolve/errors.hpp"
#include "manisolve/geometry.hpp"

namespace manisolve {

Eigen::VectorXd retract(const Problem& problem, const Eigen::VectorXd& x,
                        const RetractionConfig& retraction) {
  if (retraction.mode == RetractionMode::kClosedFormSphere) {
    const double norm = x.norm();
    if (!(norm > 0.0)) throw RetractionError("cannot normalize the zero vector");
    return x / norm;
  }
  Eigen::VectorXd y = x;
  for (int iter = 0; iter < retraction.gn_max_iters; ++iter) {
    const Eigen::VectorXd value = problem.constraint(y);
    if (value.norm() <= retraction.gn_tol) return y;
    y -= pseudoinverse(problem.constraint_jac(y)) * value;
  }
  const double residual = problem.constraint(y).norm();
  if (residual <= retraction.gn_tol) return y;
  throw RetractionError("feasibility restoration stalled at |F| = " + std::to_string(residual));
}

Trajectory run_rgd(const Problem& problem, const Eigen::VectorXd& x0, const SolverConfig& config,
                   const RetractionConfig& retraction,
                   const std::optional<Eigen::VectorXd>& x_star) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta)) {
    throw std::invalid_argument("stepsize must be positive and finite");
  }
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (problem.constraint(x0).norm() > std::max(retraction.gn_tol, 1e-10)) {
    throw std::invalid_argument("run_rgd requires a feasible starting point");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  Trajectory traj;
  traj.config = config;
  traj.termination = Termination::kMaxIters;

  std::optional<GeometryFrame> frame_star;
  if (x_star) frame_star = frame_at(problem, *x_star);

  Eigen::VectorXd x = x0;
  for (int k = 0; k <= config.max_iters; ++k) {
    GeometryFrame frame;
    try {
      frame = frame_at(problem, x);
    } catch (const RankDeficientError&) {
      traj.termination = Termination::kRankDeficient;
      break;
    }

    IterateRecord rec;
    rec.k = k;
    rec.f_val = problem.f(x);
    rec.feas = problem.constraint(x).norm();
    rec.rgrad_norm = frame.rgrad.norm();
    if (frame_star) {
      const TangentNormalSplit split = tangent_normal_split(*frame_star, x);
      rec.a = split.a;
      rec.b = split.b;
      rec.dist = (x - *x_star).norm();
    } else {
      rec.a = rec.b = rec.dist = kNaN;
    }
    if (config.record_iterates) rec.x = x;
    traj.records.push_back(std::move(rec));

    const IterateRecord& logged = traj.records.back();
    if (logged.rgrad_norm <= config.grad_tol) {
      traj.termination = Termination::kConverged;
      break;
    }
    if (config.feas_cap && logged.feas > *config.feas_cap) {
      traj.termination = Termination::kDiverged;
      break;
    }
    if (k == config.max_iters) break;

    x = retract(problem, x - config.eta * frame.rgrad, retraction);
  }
  return traj;
}

}  // namespace manisolve
