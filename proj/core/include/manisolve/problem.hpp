#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace manisolve {

/// Equality-constrained minimization problem
///
///   minimize f(x)  subject to  F(x) = 0,
///
/// with f: R^n -> R and F: R^n -> R^m, both C^2. Derivatives are supplied
/// analytically by the instance builder; there is no automatic
/// differentiation here.
///
/// The second-derivative callbacks are optional. Only the restricted Hessian
/// and the constants estimator need them; the solvers themselves are
/// first-order and must run without them.
///
/// A Problem is immutable after construction and safe to share across
/// concurrent solver runs; every callable must be re-entrant.
struct Problem {
  int n = 0;  ///< ambient dimension
  int m = 0;  ///< number of constraints, 1 <= m <= n

  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_f;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_f;  ///< optional

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraint;      ///< F, size m
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> constraint_jac;  ///< m x n
  /// Optional: one n x n Hessian per constraint component.
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> constraint_hess;

  bool has_second_derivatives() const {
    return static_cast<bool>(hess_f) && static_cast<bool>(constraint_hess);
  }
};

/// Benchmark instance: minimize (1/2) x'Ax on the unit sphere. The minimizer
/// is the eigenvector of the smallest eigenvalue, which is kept simple by
/// construction so the restricted Hessian is positive definite at x_star.
struct EigenInstance {
  Eigen::MatrixXd A;            ///< symmetric n x n
  Eigen::VectorXd eigenvalues;  ///< ascending, eigenvalues[0] strictly simple
  Eigen::VectorXd x_star;       ///< unit eigenvector for eigenvalues[0]
  double kappa_R = 0.0;         ///< (lambda_n - lambda_1) / (lambda_2 - lambda_1)
};

/// Wraps an instance as a Problem: f(x) = x'Ax/2, F(x) = |x|^2 - 1 (m = 1).
Problem eigenvalue_problem(const EigenInstance& inst);

/// Random instance with exact spectral layout lambda_1 = 0, lambda_2 = 1,
/// lambda_n = kappa and the interior drawn uniformly from [1, kappa], so the
/// restricted condition number equals kappa exactly. Pure function of
/// (n, kappa, seed): identical arguments give a bitwise-identical matrix.
///
/// Throws std::invalid_argument for n < 3 or kappa <= 1.
EigenInstance make_instance(int n, double kappa, std::uint64_t seed);

/// Returns x_star + eps * u with u a seeded uniform draw from the unit
/// sphere, so the start sits at distance exactly eps from x_star.
Eigen::VectorXd sample_initialization(const Eigen::VectorXd& x_star, double eps,
                                      std::uint64_t seed);

/// On-disk description of a random instance plus its initialization radius.
struct InstanceSpec {
  int n = 0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  double eps = 0.0;
};

InstanceSpec load_instance_spec(const std::filesystem::path& file);
void save_instance_spec(const InstanceSpec& spec, const std::filesystem::path& file);

/// Dense row-major text dump of a matrix, one row per line, for
/// reproducibility audits.
void dump_matrix(const Eigen::MatrixXd& a, const std::filesystem::path& file);

}  // namespace manisolve
