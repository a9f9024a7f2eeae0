#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "manisolve/geometry.hpp"
#include "manisolve/problem.hpp"
#include "manisolve/trajectory.hpp"

namespace manisolve {

/// One update of the first-order scheme: project the gradient onto the
/// tangent space for the objective part and take a full Newton step on the
/// constraints,
///
///   x+  =  x - eta * P_x grad_f(x) - pinv(J(x)) F(x).
///
/// Throws RankDeficientError when J(x) loses row rank.
Eigen::VectorXd sqp_step(const Problem& problem, const Eigen::VectorXd& x, double eta);

/// Same update reusing a frame already computed at x.
Eigen::VectorXd sqp_step(const Problem& problem, const GeometryFrame& frame, double eta);

/// Stepsize 1/lambda_max from the tangent-restricted Hessian spectrum at
/// x_star. Requires second derivatives and positive lambda_max.
double canonical_stepsize(const Problem& problem, const Eigen::VectorXd& x_star);

/// Iterates sqp_step from x0, logging one record per visited point
/// (records.front() is x0 itself). When x_star is given the a/b/dist columns
/// are filled from the tangent/normal split at x_star, otherwise they are NaN.
/// A rank failure mid-run terminates with Termination::kRankDeficient; the
/// offending point is not recorded.
Trajectory run_sqp(const Problem& problem, const Eigen::VectorXd& x0,
                   const SolverConfig& config,
                   const std::optional<Eigen::VectorXd>& x_star = std::nullopt);

}  // namespace manisolve
