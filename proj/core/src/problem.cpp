#include "manisolve/problem.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "manisolve/rng.hpp"

namespace manisolve {

Problem eigenvalue_problem(const EigenInstance& instance) {
  const Eigen::MatrixXd a = instance.A;
  const int n = static_cast<int>(a.rows());
  if (n < 1 || a.cols() != n) throw std::invalid_argument("eigenvalue_problem: A must be square");

  Problem problem;
  problem.n = n;
  problem.m = 1;
  problem.f = [a](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x); };
  problem.grad_f = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  problem.hess_f = [a](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
  problem.constraint = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd value(1);
    value(0) = x.squaredNorm() - 1.0;
    return value;
  };
  problem.constraint_jac = [n](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd jac(1, n);
    jac.row(0) = 2.0 * x.transpose();
    return jac;
  };
  problem.constraint_hess = [n](const Eigen::VectorXd&) -> std::vector<Eigen::MatrixXd> {
    return {2.0 * Eigen::MatrixXd::Identity(n, n)};
  };
  return problem;
}

EigenInstance make_instance(int n, double kappa, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("make_instance: n must be at least 3");
  if (!(kappa > 1.0)) throw std::invalid_argument("make_instance: kappa must exceed 1");

  Rng rng = make_rng(seed);

  // Spectrum pinned at 0, 1 and kappa so the restricted condition number of
  // the projected Hessian at the minimizer is exactly kappa.
  Eigen::VectorXd eigenvalues(n);
  eigenvalues(0) = 0.0;
  eigenvalues(1) = 1.0;
  eigenvalues(n - 1) = kappa;
  if (n > 3) {
    std::uniform_real_distribution<double> interior(1.0, kappa);
    std::vector<double> fill(static_cast<std::size_t>(n - 3));
    for (double& v : fill) v = interior(rng);
    std::sort(fill.begin(), fill.end());
    for (int i = 0; i < n - 3; ++i) eigenvalues(2 + i) = fill[static_cast<std::size_t>(i)];
  }

  Eigen::MatrixXd gauss = gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }

  EigenInstance instance;
  instance.A = q * eigenvalues.asDiagonal() * q.transpose();
  instance.A = 0.5 * (instance.A + instance.A.transpose()).eval();
  instance.eigenvalues = eigenvalues;
  instance.x_star = q.col(0);
  instance.kappa_R = kappa;
  return instance;
}

Eigen::VectorXd sample_initialization(const Eigen::VectorXd& x_star, double eps,
                                      std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("sample_initialization: eps must be positive");
  Rng rng = make_rng(seed);
  const Eigen::VectorXd direction = unit_sphere_vector(rng, static_cast<int>(x_star.size()));
  return x_star + eps * direction;
}

InstanceSpec load_instance_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open instance spec: " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed instance spec " + file.string() + ": " + e.what());
  }
  InstanceSpec spec;
  try {
    spec.n = doc.at("n").get<int>();
    spec.kappa = doc.at("kappa").get<double>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.eps = doc.at("eps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("instance spec " + file.string() +
                                " must contain n, kappa, seed, eps: " + e.what());
  }
  if (spec.n < 3) throw std::invalid_argument("instance spec: n must be at least 3");
  if (!(spec.kappa > 1.0)) throw std::invalid_argument("instance spec: kappa must exceed 1");
  if (!(spec.eps > 0.0)) throw std::invalid_argument("instance spec: eps must be positive");
  return spec;
}

void save_instance_spec(const InstanceSpec& spec, const std::filesystem::path& file) {
  nlohmann::json doc;
  doc["n"] = spec.n;
  doc["kappa"] = spec.kappa;
  doc["seed"] = spec.seed;
  doc["eps"] = spec.eps;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write instance spec: " + file.string());
  out << doc.dump(2) << "\n";
}

void dump_matrix(const Eigen::MatrixXd& mat, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write matrix: " + file.string());
  char buf[32];
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", mat(i, j));
      out << buf;
      out << (j + 1 < mat.cols() ? ',' : '\n');
    }
  }
}

}  // namespace manisolve
