#pragma once

#include <optional>

#include <Eigen/Core>

#include "manisolve/problem.hpp"
#include "manisolve/trajectory.hpp"

namespace manisolve {

enum class RetractionMode {
  kClosedFormSphere,  ///< normalize, valid only for the unit-sphere constraint
  kGaussNewton,       ///< damped Gauss-Newton projection onto F(x) = 0
};

struct RetractionConfig {
  RetractionMode mode = RetractionMode::kGaussNewton;
  double gn_tol = 1e-12;  ///< stop when |F(x)| <= gn_tol
  int gn_max_iters = 20;
};

/// Maps an ambient point back onto the constraint set. The Gauss-Newton mode
/// iterates x <- x - pinv(J(x)) F(x) from the given point; throws
/// RetractionError if |F| fails to reach gn_tol within the budget, and
/// RankDeficientError if the Jacobian degenerates along the way.
Eigen::VectorXd retract(const Problem& problem, const Eigen::VectorXd& x,
                        const RetractionConfig& retraction);

/// Riemannian gradient descent: x+ = retract(x - eta * P_x grad_f(x)).
/// Requires a feasible start (|F(x0)| <= gn_tol), else std::invalid_argument.
/// Logging matches run_sqp so trajectories are directly comparable.
Trajectory run_rgd(const Problem& problem, const Eigen::VectorXd& x0,
                   const SolverConfig& config, const RetractionConfig& retraction,
                   const std::optional<Eigen::VectorXd>& x_star = std::nullopt);

}  // namespace manisolve
