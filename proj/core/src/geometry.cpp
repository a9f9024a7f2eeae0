#include "manisolve/geometry.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "manisolve/errors.hpp"

namespace manisolve {

namespace {

// QR factorization of J' shared by the pseudoinverse and frame builders.
// Row rank of J is verified on R's singular values before any solve.
struct JacFactorization {
  Eigen::MatrixXd q_thin;  // n x m, orthonormal columns spanning range(J')
  Eigen::MatrixXd r;       // m x m upper triangular, J = R' Q'
  double sigma_min = 0.0;
};

JacFactorization factor_jac(const Eigen::MatrixXd& jac) {
  const Eigen::Index m = jac.rows();
  const Eigen::Index n = jac.cols();
  if (m < 1 || m > n) {
    throw std::invalid_argument("constraint Jacobian must have 1 <= rows <= cols");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(jac.transpose());
  JacFactorization fac;
  fac.q_thin = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
  fac.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(fac.r);
  const double sigma_max = svd.singularValues()(0);
  fac.sigma_min = svd.singularValues()(m - 1);
  const double tol = rank_tolerance(sigma_max);
  if (!(fac.sigma_min > tol)) throw RankDeficientError(fac.sigma_min, tol);
  return fac;
}

Eigen::MatrixXd pinv_from(const JacFactorization& fac) {
  const Eigen::Index m = fac.r.rows();
  const Eigen::MatrixXd rinv_t =
      fac.r.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
  return fac.q_thin * rinv_t;
}

}  // namespace

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& jac) {
  return pinv_from(factor_jac(jac));
}

GeometryFrame frame_at(const Problem& problem, const Eigen::VectorXd& x) {
  if (x.size() != problem.n) throw std::invalid_argument("frame_at: x has wrong dimension");
  GeometryFrame frame;
  frame.x = x;
  frame.jac = problem.constraint_jac(x);
  const JacFactorization fac = factor_jac(frame.jac);
  frame.p_perp = fac.q_thin * fac.q_thin.transpose();
  frame.p = Eigen::MatrixXd::Identity(problem.n, problem.n) - frame.p_perp;
  frame.jac_pinv = pinv_from(fac);
  frame.rgrad = frame.p * problem.grad_f(x);
  frame.sigma_min_jac = fac.sigma_min;
  return frame;
}

Eigen::MatrixXd riemannian_hessian(const Problem& problem, const Eigen::VectorXd& x) {
  if (!problem.has_second_derivatives()) {
    throw MissingHessianError("riemannian_hessian needs hess_f and constraint_hess");
  }
  const GeometryFrame frame = frame_at(problem, x);
  const Eigen::VectorXd multipliers = frame.jac_pinv.transpose() * problem.grad_f(x);
  Eigen::MatrixXd curved = problem.hess_f(x);
  const std::vector<Eigen::MatrixXd> constraint_curv = problem.constraint_hess(x);
  if (static_cast<int>(constraint_curv.size()) != problem.m) {
    throw std::invalid_argument("constraint_hess must return one matrix per constraint");
  }
  for (int i = 0; i < problem.m; ++i) curved -= multipliers(i) * constraint_curv[i];
  Eigen::MatrixXd h = frame.p * curved * frame.p;
  return 0.5 * (h + h.transpose()).eval();
}

TangentNormalSplit tangent_normal_split(const GeometryFrame& frame_star,
                                        const Eigen::VectorXd& x) {
  const Eigen::VectorXd delta = x - frame_star.x;
  TangentNormalSplit split;
  split.a = (frame_star.p * delta).norm();
  split.b = (frame_star.p_perp * delta).norm();
  return split;
}

SpectralSummary hessian_spectrum(const Eigen::MatrixXd& h, const GeometryFrame& frame_star) {
  const Eigen::Index n = frame_star.jac.cols();
  const Eigen::Index m = frame_star.jac.rows();
  if (n == m) {
    throw DegenerateTangentError("tangent space at this point is zero-dimensional");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame_star.jac.transpose());
  const Eigen::MatrixXd q_full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd basis = q_full.rightCols(n - m);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis.transpose() * h * basis);
  SpectralSummary summary;
  summary.lambda_min = eig.eigenvalues()(0);
  summary.lambda_max = eig.eigenvalues()(n - m - 1);
  if (!(summary.lambda_min > 0.0)) {
    throw NonPositiveCurvatureError("restricted Hessian is not positive definite (lambda_min = " +
                                    std::to_string(summary.lambda_min) + ")");
  }
  summary.kappa_R = summary.lambda_max / summary.lambda_min;
  return summary;
}

}  // namespace manisolve
