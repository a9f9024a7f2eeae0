#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "manisolve/errors.hpp"
#include "manisolve/rng.hpp"
#include "manisolve/sqp.hpp"
#include "oracles.hpp"

using namespace manisolve;

TEST_CASE("one step equals projected gradient plus constraint correction") {
  const EigenInstance inst = make_instance(14, 12.0, 4);
  const Problem problem = eigenvalue_problem(inst);
  Rng rng = make_rng(10);
  const Eigen::VectorXd x = inst.x_star + ball_vector(rng, 14, 0.4);
  const double eta = 0.03;

  const Eigen::MatrixXd jac = problem.constraint_jac(x);
  const Eigen::VectorXd manual = x - eta * (oracle::null_projector(jac) * problem.grad_f(x)) -
                                 oracle::svd_pinv(jac) * problem.constraint(x);
  CHECK((sqp_step(problem, x, eta) - manual).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one step solves the quadratic subproblem") {
  Rng rng = make_rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const EigenInstance inst = make_instance(12, 7.0, 100 + trial);
    const Problem problem = eigenvalue_problem(inst);
    const Eigen::VectorXd x = inst.x_star + ball_vector(rng, 12, 0.5);
    std::uniform_real_distribution<double> log_eta(-3.0, 0.0);
    const double eta = std::pow(10.0, log_eta(rng));

    const Eigen::VectorXd direct = sqp_step(problem, x, eta);
    const Eigen::VectorXd via_kkt = oracle::kkt_step(x, problem.grad_f(x),
                                                     problem.constraint_jac(x),
                                                     problem.constraint(x), eta);
    CHECK((direct - via_kkt).norm() / std::max(1.0, direct.norm()) < 1e-10);
  }
}

TEST_CASE("constraint violation after a feasible-start step is second order in eta") {
  const EigenInstance inst = make_instance(16, 10.0, 6);
  const Problem problem = eigenvalue_problem(inst);
  Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.2, 12);
  x0 /= x0.norm();

  std::vector<double> etas, violations;
  for (double eta : {1e-1, 1e-2, 1e-3}) {
    const Eigen::VectorXd next = sqp_step(problem, x0, eta);
    etas.push_back(eta);
    violations.push_back(problem.constraint(next).norm());
  }
  CHECK(oracle::loglog_slope(etas, violations) > 1.9);
}

TEST_CASE("canonical stepsize inverts the top restricted eigenvalue") {
  const EigenInstance inst = make_instance(20, 25.0, 15);
  const Problem problem = eigenvalue_problem(inst);
  const double spread = inst.eigenvalues(19) - inst.eigenvalues(0);
  CHECK(canonical_stepsize(problem, inst.x_star) == doctest::Approx(1.0 / spread).epsilon(1e-10));
}

TEST_CASE("run bookkeeping: contiguous records, first record is the start") {
  const EigenInstance inst = make_instance(10, 5.0, 20);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.01, 21);

  SolverConfig config;
  config.eta = canonical_stepsize(problem, inst.x_star);
  config.max_iters = 50;
  config.grad_tol = 0.0;
  config.record_iterates = true;
  const Trajectory traj = run_sqp(problem, x0, config, inst.x_star);

  CHECK(traj.termination == Termination::kMaxIters);
  REQUIRE(traj.records.size() == 51);  // start plus one per step
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    CHECK(traj.records[i].k == static_cast<int>(i));
    REQUIRE(traj.records[i].x.has_value());
  }
  CHECK((*traj.records[0].x - x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.records[0].dist == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(traj.records[0].f_val == doctest::Approx(problem.f(x0)));

  // Each recorded point reproduces the step map applied to its predecessor.
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const Eigen::VectorXd expected = sqp_step(problem, *traj.records[i - 1].x, config.eta);
    CHECK((*traj.records[i].x - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("run converges on the gradient tolerance and reports it") {
  const EigenInstance inst = make_instance(10, 5.0, 25);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.01, 26);

  SolverConfig config;
  config.eta = canonical_stepsize(problem, inst.x_star);
  config.max_iters = 5000;
  config.grad_tol = 1e-9;
  const Trajectory traj = run_sqp(problem, x0, config, inst.x_star);
  CHECK(traj.termination == Termination::kConverged);
  CHECK(traj.records.back().rgrad_norm <= 1e-9);
  CHECK(traj.records.back().dist < 1e-8);
  CHECK(static_cast<int>(traj.records.size()) < 5001);
}

TEST_CASE("divergence guard trips on the feasibility cap") {
  const EigenInstance inst = make_instance(10, 5.0, 30);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::VectorXd x0 = sample_initialization(inst.x_star, 3.0, 31);

  SolverConfig config;
  config.eta = 0.01;
  config.max_iters = 100;
  config.feas_cap = 1.0;  // |F(x0)| = |9 + ...| is far above this
  const Trajectory traj = run_sqp(problem, x0, config, inst.x_star);
  CHECK(traj.termination == Termination::kDiverged);
  CHECK(traj.records.size() == 1);
}

TEST_CASE("rank collapse at the start yields the dedicated status and no records") {
  const EigenInstance inst = make_instance(10, 5.0, 35);
  const Problem problem = eigenvalue_problem(inst);
  SolverConfig config;
  config.eta = 0.1;
  config.max_iters = 10;
  const Trajectory traj = run_sqp(problem, Eigen::VectorXd::Zero(10), config);
  CHECK(traj.termination == Termination::kRankDeficient);
  CHECK(traj.records.empty());
}

TEST_CASE("solver configuration is validated") {
  const EigenInstance inst = make_instance(10, 5.0, 40);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.01, 41);

  SolverConfig config;
  config.eta = 0.0;
  CHECK_THROWS_AS(run_sqp(problem, x0, config), std::invalid_argument);
  config.eta = -1.0;
  CHECK_THROWS_AS(run_sqp(problem, x0, config), std::invalid_argument);
  config.eta = 0.1;
  config.max_iters = 0;
  CHECK_THROWS_AS(run_sqp(problem, x0, config), std::invalid_argument);
  CHECK_THROWS_AS(sqp_step(problem, x0, 0.0), std::invalid_argument);
}

TEST_CASE("columns without a reference point are NaN") {
  const EigenInstance inst = make_instance(10, 5.0, 45);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::VectorXd x0 = sample_initialization(inst.x_star, 0.01, 46);

  SolverConfig config;
  config.eta = 0.1;
  config.max_iters = 3;
  const Trajectory traj = run_sqp(problem, x0, config);
  for (const IterateRecord& rec : traj.records) {
    CHECK(std::isnan(rec.a));
    CHECK(std::isnan(rec.b));
    CHECK(std::isnan(rec.dist));
    CHECK(std::isfinite(rec.f_val));
    CHECK(std::isfinite(rec.rgrad_norm));
  }
}
