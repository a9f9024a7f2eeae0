#include "manisolve/sqp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "manisolve/errors.hpp"

namespace manisolve {

namespace {

void validate_config(const SolverConfig& config) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta)) {
    throw std::invalid_argument("stepsize must be positive and finite");
  }
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (config.grad_tol < 0.0) throw std::invalid_argument("grad_tol must be nonnegative");
}

}  // namespace

Eigen::VectorXd sqp_step(const Problem& problem, const GeometryFrame& frame, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("stepsize must be positive and finite");
  }
  return frame.x - eta * frame.rgrad - frame.jac_pinv * problem.constraint(frame.x);
}

Eigen::VectorXd sqp_step(const Problem& problem, const Eigen::VectorXd& x, double eta) {
  return sqp_step(problem, frame_at(problem, x), eta);
}

double canonical_stepsize(const Problem& problem, const Eigen::VectorXd& x_star) {
  const GeometryFrame frame_star = frame_at(problem, x_star);
  const Eigen::MatrixXd h = riemannian_hessian(problem, x_star);
  const SpectralSummary spectrum = hessian_spectrum(h, frame_star);
  return 1.0 / spectrum.lambda_max;
}

Trajectory run_sqp(const Problem& problem, const Eigen::VectorXd& x0,
                   const SolverConfig& config, const std::optional<Eigen::VectorXd>& x_star) {
  validate_config(config);
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
    const Eigen::VectorXd constraint_val = problem.constraint(x);

    IterateRecord rec;
    rec.k = k;
    rec.f_val = problem.f(x);
    rec.feas = constraint_val.norm();
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

    x = frame.x - config.eta * frame.rgrad - frame.jac_pinv * constraint_val;
  }
  return traj;
}

}  // namespace manisolve
