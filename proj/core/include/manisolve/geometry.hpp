#pragma once

#include <Eigen/Core>

#include "manisolve/problem.hpp"

namespace manisolve {

/// Cached constraint geometry at a point x, valid on or off the feasible set.
///
/// The tangent projection is built from an orthogonal factorization of the
/// constraint Jacobian transpose, which agrees with the normal-equations
/// formula P = I - J'(JJ')^{-1}J up to rounding but is better conditioned.
struct GeometryFrame {
  Eigen::VectorXd x;
  Eigen::MatrixXd jac;     ///< constraint Jacobian at x, m x n
  Eigen::MatrixXd p;       ///< projection onto ker(jac), n x n
  Eigen::MatrixXd p_perp;  ///< projection onto range(jac'), n x n
  Eigen::MatrixXd jac_pinv;  ///< Moore-Penrose inverse J'(JJ')^{-1}, n x m
  Eigen::VectorXd rgrad;     ///< projected gradient p * grad_f(x)
  double sigma_min_jac = 0.0;
};

/// Extreme eigenvalues of a symmetric operator restricted to the tangent
/// space, and their ratio.
struct SpectralSummary {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa_R = 0.0;
};

/// Rank threshold below which the constraint qualification is treated as
/// failed. The theory only assumes a positive lower bound on the least
/// singular value; this pins a concrete numerical cutoff.
inline double rank_tolerance(double jac_op_norm) {
  return 1e-10 * (jac_op_norm > 1.0 ? jac_op_norm : 1.0);
}

/// Moore-Penrose inverse of a full-row-rank matrix, computed through a QR
/// factorization of the transpose rather than an explicit inverse of JJ'.
/// Throws RankDeficientError when sigma_min(jac) falls at or below the rank
/// tolerance.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& jac);

/// Builds the full geometry frame at x. Works at infeasible points too; all
/// quantities are the natural extensions off the feasible set.
GeometryFrame frame_at(const Problem& problem, const Eigen::VectorXd& x);

/// Matrix representation of the constrained Hessian at x,
///
///   H = P Hf P - sum_i w_i P HFi P,   w = pinv(J)' grad_f(x),
///
/// symmetrized after assembly to remove rounding asymmetry from the tensor
/// contraction. Requires both second-derivative callbacks.
Eigen::MatrixXd riemannian_hessian(const Problem& problem, const Eigen::VectorXd& x);

/// Distances of x from frame_star.x split along the tangent and normal
/// subspaces at frame_star.x. Satisfies a^2 + b^2 = |x - x_star|^2.
struct TangentNormalSplit {
  double a = 0.0;  ///< tangent component norm
  double b = 0.0;  ///< normal component norm
};

TangentNormalSplit tangent_normal_split(const GeometryFrame& frame_star,
                                        const Eigen::VectorXd& x);

/// Extreme eigenvalues of symmetric H restricted to the tangent space at
/// frame_star.x, via an orthonormal tangent basis from the null-space block
/// of the Jacobian factorization. Throws DegenerateTangentError when the
/// tangent space is zero-dimensional (n == m).
SpectralSummary hessian_spectrum(const Eigen::MatrixXd& h, const GeometryFrame& frame_star);

}  // namespace manisolve
