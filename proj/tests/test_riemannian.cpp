#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "manisolve/errors.hpp"
#include "manisolve/riemannian.hpp"
#include "manisolve/rng.hpp"
#include "manisolve/sqp.hpp"
#include "oracles.hpp"

using namespace manisolve;

namespace {

// Ellipsoid constraint x'Dx = 1 with distinct positive D, so the
// Gauss-Newton path is exercised on something other than the sphere.
Problem ellipsoid_problem(const Eigen::VectorXd& d) {
  const int n = static_cast<int>(d.size());
  Problem problem;
  problem.n = n;
  problem.m = 1;
  problem.f = [](const Eigen::VectorXd& x) { return x.sum(); };
  problem.grad_f = [n](const Eigen::VectorXd&) -> Eigen::VectorXd {
    return Eigen::VectorXd::Ones(n);
  };
  problem.constraint = [d](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd value(1);
    value(0) = x.cwiseProduct(d).dot(x) - 1.0;
    return value;
  };
  problem.constraint_jac = [d](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return (2.0 * x.cwiseProduct(d)).transpose();
  };
  return problem;
}

}  // namespace

TEST_CASE("closed-form sphere retraction normalizes") {
  const EigenInstance inst = make_instance(9, 5.0, 2);
  const Problem problem = eigenvalue_problem(inst);
  RetractionConfig retraction;
  retraction.mode = RetractionMode::kClosedFormSphere;

  Rng rng = make_rng(50);
  const Eigen::VectorXd x = 3.7 * unit_sphere_vector(rng, 9);
  const Eigen::VectorXd y = retract(problem, x, retraction);
  CHECK(y.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((y - x / x.norm()).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(retract(problem, Eigen::VectorXd::Zero(9), retraction), RetractionError);
}

TEST_CASE("iterative retraction restores feasibility on the ellipsoid") {
  Rng rng = make_rng(60);
  Eigen::VectorXd d(6);
  d << 0.5, 1.0, 1.5, 2.0, 2.5, 3.0;
  const Problem problem = ellipsoid_problem(d);

  RetractionConfig retraction;  // defaults: Gauss-Newton
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd on = unit_sphere_vector(rng, 6);
    on /= std::sqrt(on.cwiseProduct(d).dot(on));  // feasible point
    const Eigen::VectorXd off = on + 0.05 * gaussian_vector(rng, 6);
    const Eigen::VectorXd back = retract(problem, off, retraction);
    CHECK(std::abs(back.cwiseProduct(d).dot(back) - 1.0) <= retraction.gn_tol);
    CHECK((back - off).norm() < 0.2);  // stays near the unprojected point
  }
}

TEST_CASE("iterative retraction reports unreachable tolerance") {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(4);
  const Problem problem = ellipsoid_problem(d);
  RetractionConfig retraction;
  retraction.gn_max_iters = 1;
  retraction.gn_tol = 1e-15;
  Eigen::VectorXd far(4);
  far << 30.0, 0.0, 0.0, 0.0;  // one Newton step cannot close a gap this size
  CHECK_THROWS_AS(retract(problem, far, retraction), RetractionError);
}

TEST_CASE("descent requires a feasible start") {
  const EigenInstance inst = make_instance(10, 6.0, 3);
  const Problem problem = eigenvalue_problem(inst);
  SolverConfig config;
  config.eta = 0.05;
  RetractionConfig retraction;
  retraction.mode = RetractionMode::kClosedFormSphere;
  const Eigen::VectorXd infeasible = 1.5 * inst.x_star;
  CHECK_THROWS_AS(run_rgd(problem, infeasible, config, retraction), std::invalid_argument);
}

TEST_CASE("descent converges and stays on the constraint set") {
  const EigenInstance inst = make_instance(20, 10.0, 4);
  const Problem problem = eigenvalue_problem(inst);
  Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.05, 5);
  x0 /= x0.norm();

  SolverConfig config;
  config.eta = canonical_stepsize(problem, inst.x_star);
  config.max_iters = 2000;
  config.grad_tol = 1e-10;
  RetractionConfig retraction;
  retraction.mode = RetractionMode::kClosedFormSphere;
  const Trajectory traj = run_rgd(problem, x0, config, retraction, inst.x_star);

  CHECK(traj.termination == Termination::kConverged);
  CHECK(traj.records.back().dist < 1e-8);
  for (const IterateRecord& rec : traj.records) CHECK(rec.feas < 1e-12);
}

TEST_CASE("both retraction modes agree on the sphere") {
  const EigenInstance inst = make_instance(12, 8.0, 6);
  const Problem problem = eigenvalue_problem(inst);
  Rng rng = make_rng(70);
  const Eigen::VectorXd x = unit_sphere_vector(rng, 12) * 1.08;

  RetractionConfig closed;
  closed.mode = RetractionMode::kClosedFormSphere;
  RetractionConfig iterative;
  const Eigen::VectorXd a = retract(problem, x, closed);
  const Eigen::VectorXd b = retract(problem, x, iterative);
  // Same constraint set, different maps; near the set they differ at second
  // order in the offset.
  CHECK((a - b).norm() < 1e-2);
  CHECK(std::abs(b.norm() - 1.0) < 1e-12);
}

TEST_CASE("one-step gap between the two methods shrinks quadratically in eta") {
  const EigenInstance inst = make_instance(14, 9.0, 7);
  const Problem problem = eigenvalue_problem(inst);
  Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.1, 8);
  x0 /= x0.norm();
  RetractionConfig retraction;
  retraction.mode = RetractionMode::kClosedFormSphere;

  std::vector<double> etas, gaps;
  for (double eta : {1e-1, 1e-2, 1e-3}) {
    const Eigen::VectorXd via_sqp = sqp_step(problem, x0, eta);
    const GeometryFrame frame = frame_at(problem, x0);
    const Eigen::VectorXd via_rgd = retract(problem, x0 - eta * frame.rgrad, retraction);
    etas.push_back(eta);
    gaps.push_back((via_sqp - via_rgd).norm());
  }
  CHECK(oracle::loglog_slope(etas, gaps) > 1.9);
}
