#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "manisolve/errors.hpp"
#include "manisolve/geometry.hpp"
#include "manisolve/problem.hpp"
#include "manisolve/rng.hpp"
#include "oracles.hpp"

using namespace manisolve;

namespace {

// Sphere-plus-hyperplane problem, m = 2, to exercise multi-constraint paths:
// F(x) = (|x|^2 - 1, x_0 - c).
Problem two_constraint_problem(int n, double c) {
  Problem problem;
  problem.n = n;
  problem.m = 2;
  problem.f = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  problem.grad_f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
  problem.constraint = [c](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd value(2);
    value << x.squaredNorm() - 1.0, x(0) - c;
    return value;
  };
  problem.constraint_jac = [n](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, n);
    jac.row(0) = 2.0 * x.transpose();
    jac(1, 0) = 1.0;
    return jac;
  };
  return problem;
}

}  // namespace

TEST_CASE("pseudoinverse agrees with the SVD route and satisfies the axioms") {
  Rng rng = make_rng(17);
  for (int m : {1, 2, 4}) {
    const Eigen::MatrixXd jac = gaussian_matrix(rng, m, 10);
    const Eigen::MatrixXd pinv = pseudoinverse(jac);
    REQUIRE(pinv.rows() == 10);
    REQUIRE(pinv.cols() == m);

    CHECK((pinv - oracle::svd_pinv(jac)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((jac * pinv - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd pp = pinv * jac;  // projection onto range(jac')
    CHECK((pp * pp - pp).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pp - pp.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rank-deficient Jacobians are refused") {
  CHECK_THROWS_AS(pseudoinverse(Eigen::MatrixXd::Zero(1, 5)), RankDeficientError);

  Eigen::MatrixXd duplicated(2, 5);
  duplicated.row(0) = Eigen::RowVectorXd::LinSpaced(5, 1.0, 5.0);
  duplicated.row(1) = 2.0 * duplicated.row(0);
  CHECK_THROWS_AS(pseudoinverse(duplicated), RankDeficientError);

  try {
    pseudoinverse(Eigen::MatrixXd::Zero(2, 6));
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(e.sigma_min == 0.0);
    CHECK(e.tol > 0.0);
  }

  // Wide-side misuse is a caller bug, not a rank failure.
  CHECK_THROWS_AS(pseudoinverse(Eigen::MatrixXd::Identity(5, 3)), std::invalid_argument);
}

TEST_CASE("frame projections behave like projections") {
  const Problem problem = two_constraint_problem(7, 0.4);
  Rng rng = make_rng(5);
  const Eigen::VectorXd x = gaussian_vector(rng, 7);
  const GeometryFrame frame = frame_at(problem, x);

  CHECK((frame.p + frame.p_perp - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((frame.p * frame.p - frame.p).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((frame.p - frame.p.transpose()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((frame.jac * frame.p).cwiseAbs().maxCoeff() < 1e-12);       // P kills constraint rows
  CHECK((frame.p * frame.jac_pinv).cwiseAbs().maxCoeff() < 1e-12);  // pinv range is normal
  CHECK((frame.rgrad - frame.p * problem.grad_f(x)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((frame.p - oracle::null_projector(frame.jac)).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame.jac);
  CHECK(frame.sigma_min_jac ==
        doctest::Approx(svd.singularValues()(1)).epsilon(1e-12));
}

TEST_CASE("constrained Hessian matches finite differences of the projected gradient") {
  const EigenInstance inst = make_instance(10, 8.0, 42);
  const Problem problem = eigenvalue_problem(inst);
  const Eigen::MatrixXd h = riemannian_hessian(problem, inst.x_star);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const GeometryFrame frame = frame_at(problem, inst.x_star);
  Rng rng = make_rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd v = (frame.p * gaussian_vector(rng, 10)).normalized();
    const double step = 1e-5;
    const auto rgrad_of = [&](const Eigen::VectorXd& y) { return frame_at(problem, y).rgrad; };
    const Eigen::VectorXd fd =
        (rgrad_of(inst.x_star + step * v) - rgrad_of(inst.x_star - step * v)) / (2.0 * step);
    CHECK((fd - h * v).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("constrained Hessian of the sphere instance has the shifted spectrum") {
  const EigenInstance inst = make_instance(15, 20.0, 8);
  const Problem problem = eigenvalue_problem(inst);
  const GeometryFrame frame = frame_at(problem, inst.x_star);
  const Eigen::MatrixXd h = riemannian_hessian(problem, inst.x_star);

  const SpectralSummary spectrum = hessian_spectrum(h, frame);
  CHECK(spectrum.lambda_min ==
        doctest::Approx(inst.eigenvalues(1) - inst.eigenvalues(0)).epsilon(1e-10));
  CHECK(spectrum.lambda_max ==
        doctest::Approx(inst.eigenvalues(14) - inst.eigenvalues(0)).epsilon(1e-10));
  CHECK(spectrum.kappa_R == doctest::Approx(inst.kappa_R).epsilon(1e-10));
}

TEST_CASE("Hessian without second derivatives is refused") {
  const EigenInstance inst = make_instance(6, 4.0, 2);
  Problem problem = eigenvalue_problem(inst);
  problem.hess_f = nullptr;
  CHECK_THROWS_AS(riemannian_hessian(problem, inst.x_star), MissingHessianError);
}

TEST_CASE("spectrum summary rejects saddles and degenerate tangent spaces") {
  const EigenInstance inst = make_instance(6, 4.0, 13);
  const Problem problem = eigenvalue_problem(inst);

  // At the top eigenvector the restricted curvature is negative.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inst.A);
  const Eigen::VectorXd x_top = eig.eigenvectors().col(5);
  const GeometryFrame frame_top = frame_at(problem, x_top);
  CHECK_THROWS_AS(hessian_spectrum(riemannian_hessian(problem, x_top), frame_top),
                  NonPositiveCurvatureError);

  // As many constraints as variables: no tangent directions left.
  Problem square = two_constraint_problem(2, 0.5);
  Eigen::VectorXd x(2);
  x << 0.5, std::sqrt(1.0 - 0.25);
  const GeometryFrame frame = frame_at(square, x);
  CHECK_THROWS_AS(hessian_spectrum(Eigen::MatrixXd::Identity(2, 2), frame),
                  DegenerateTangentError);
}

TEST_CASE("tangent and normal distances split the displacement") {
  const EigenInstance inst = make_instance(12, 9.0, 31);
  const Problem problem = eigenvalue_problem(inst);
  const GeometryFrame frame = frame_at(problem, inst.x_star);
  Rng rng = make_rng(77);

  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = inst.x_star + ball_vector(rng, 12, 0.3);
    const TangentNormalSplit split = tangent_normal_split(frame, x);
    const double dist = (x - inst.x_star).norm();
    CHECK(split.a * split.a + split.b * split.b == doctest::Approx(dist * dist).epsilon(1e-12));
  }

  // Purely tangent displacement: all of it lands in a.
  const Eigen::VectorXd tangent_dir = (frame.p * gaussian_vector(rng, 12)).normalized();
  const TangentNormalSplit split = tangent_normal_split(frame, inst.x_star + 0.1 * tangent_dir);
  CHECK(split.a == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(split.b < 1e-14);

  // Purely normal displacement (along x_star for the sphere): all in b.
  const TangentNormalSplit nsplit =
      tangent_normal_split(frame, inst.x_star + 0.05 * inst.x_star);
  CHECK(nsplit.b == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(nsplit.a < 1e-14);
}
