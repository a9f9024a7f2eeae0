#include "manisolve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "manisolve/errors.hpp"
#include "manisolve/rng.hpp"

namespace manisolve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double op_norm(const Eigen::MatrixXd& mat) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(mat).singularValues()(0);
}

// Two-variable least squares of r ~ c1 * d^2 + c2 * b with both coefficients
// clamped to be nonnegative (pick the better single-variable fit when the
// unconstrained solution leaves the quadrant).
void fit_remainder_coeffs(const std::vector<double>& d2, const std::vector<double>& b,
                          const std::vector<double>& r, double& c1, double& c2) {
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, t1 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    s11 += d2[i] * d2[i];
    s12 += d2[i] * b[i];
    s22 += b[i] * b[i];
    t1 += d2[i] * r[i];
    t2 += b[i] * r[i];
  }
  const auto sse = [&](double u, double v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double e = r[i] - u * d2[i] - v * b[i];
      acc += e * e;
    }
    return acc;
  };
  const double det = s11 * s22 - s12 * s12;
  c1 = 0.0;
  c2 = 0.0;
  if (det > 1e-30 * std::max(s11 * s22, 1e-300)) {
    const double u = (s22 * t1 - s12 * t2) / det;
    const double v = (s11 * t2 - s12 * t1) / det;
    if (u >= 0.0 && v >= 0.0) {
      c1 = u;
      c2 = v;
      return;
    }
  }
  const double only1 = s11 > 0.0 ? std::max(t1 / s11, 0.0) : 0.0;
  const double only2 = s22 > 0.0 ? std::max(t2 / s22, 0.0) : 0.0;
  if (sse(only1, 0.0) <= sse(0.0, only2)) {
    c1 = only1;
  } else {
    c2 = only2;
  }
}

}  // namespace

Eigen::VectorXd taylor_remainder(const Problem& problem, const Eigen::VectorXd& x_star,
                                 const Eigen::VectorXd& x) {
  const GeometryFrame frame = frame_at(problem, x);
  const Eigen::MatrixXd h_star = riemannian_hessian(problem, x_star);
  return frame.rgrad - h_star * (x - x_star);
}

ExpansionCheck check_expansion_terms(const Problem& problem, const Eigen::VectorXd& x_star,
                                     const Eigen::VectorXd& x, const EstimatedConstants& consts) {
  const GeometryFrame frame_star = frame_at(problem, x_star);
  const TangentNormalSplit split = tangent_normal_split(frame_star, x);
  const double dist = (x - x_star).norm();

  ExpansionCheck check;
  check.remainder_norm = taylor_remainder(problem, x_star, x).norm();
  check.bound = consts.C_r1_hat * dist * dist + consts.C_r2_hat * split.b;
  check.pass = check.remainder_norm <= check.bound;
  check.a = split.a;
  check.b = split.b;
  return check;
}

EstimatedConstants estimate_constants(const Problem& problem, const Eigen::VectorXd& x_star,
                                      double radius, int n_samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("estimate_constants: radius must be positive");
  if (n_samples < 2) throw std::invalid_argument("estimate_constants: need at least two samples");

  Rng rng = make_rng(seed);
  const int n = problem.n;
  const GeometryFrame frame_star = frame_at(problem, x_star);
  const Eigen::MatrixXd h_star = riemannian_hessian(problem, x_star);

  EstimatedConstants consts;
  consts.radius = radius;
  consts.n_samples = n_samples;
  consts.gamma_F_hat = std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(n_samples));
  std::vector<GeometryFrame> frames(static_cast<std::size_t>(n_samples));
  std::vector<double> d2_col, b_col, r_col;
  d2_col.reserve(points.size());
  b_col.reserve(points.size());
  r_col.reserve(points.size());

  for (int i = 0; i < n_samples; ++i) {
    // Alternate raw ball points with tangent-projected ones. A plain ball
    // sample almost never lands close to the tangent space, so without the
    // projected half the quadratic coefficient is unidentifiable whenever
    // the linear term dominates at the calibration radius.
    Eigen::VectorXd offset = ball_vector(rng, n, radius);
    if (i % 2 == 1) offset = frame_star.p * offset;
    const Eigen::VectorXd x = x_star + offset;
    const GeometryFrame frame = frame_at(problem, x);
    points[static_cast<std::size_t>(i)] = x;
    frames[static_cast<std::size_t>(i)] = frame;

    consts.G_f_hat = std::max(consts.G_f_hat, problem.grad_f(x).norm());
    consts.gamma_F_hat = std::min(consts.gamma_F_hat, frame.sigma_min_jac);

    const TangentNormalSplit split = tangent_normal_split(frame_star, x);
    const double dist = (x - x_star).norm();
    d2_col.push_back(dist * dist);
    b_col.push_back(split.b);
    r_col.push_back((frame.rgrad - h_star * (x - x_star)).norm());
  }

  for (int i = 0; i + 1 < n_samples; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = a + 1;
    const double gap = (points[a] - points[b]).norm();
    if (!(gap > 0.0)) continue;
    consts.beta_F_hat = std::max(consts.beta_F_hat, op_norm(frames[a].jac - frames[b].jac) / gap);
    consts.beta_P_hat = std::max(consts.beta_P_hat, op_norm(frames[a].p - frames[b].p) / gap);
    consts.beta_D_hat =
        std::max(consts.beta_D_hat, op_norm(frames[a].jac_pinv - frames[b].jac_pinv) / gap);
    consts.beta_E_hat =
        std::max(consts.beta_E_hat, (frames[a].rgrad - frames[b].rgrad).norm() / gap);
  }

  fit_remainder_coeffs(d2_col, b_col, r_col, consts.C_r1_hat, consts.C_r2_hat);

  // Inflate the fitted coefficients until the bound envelopes every
  // calibration sample, then add headroom for nearby unseen points.
  double scale = 0.0;
  for (std::size_t i = 0; i < r_col.size(); ++i) {
    const double denom = consts.C_r1_hat * d2_col[i] + consts.C_r2_hat * b_col[i];
    if (denom > 0.0) scale = std::max(scale, r_col[i] / denom);
  }
  if (scale == 0.0) scale = 1.0;
  scale *= 1.25;
  consts.C_r1_hat *= scale;
  consts.C_r2_hat *= scale;
  return consts;
}

RateReport check_local_rate(const Trajectory& traj, double kappa, double sigma) {
  if (traj.records.size() < 3) {
    throw InsufficientDataError("rate audit needs at least three records");
  }
  if (!(kappa > 1.0)) throw std::invalid_argument("check_local_rate: kappa must exceed 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("check_local_rate: sigma must be positive");
  if (!std::isfinite(traj.records.front().a) || !std::isfinite(traj.records.front().b)) {
    throw std::invalid_argument("rate audit needs a/b columns (run with a reference point)");
  }

  RateReport report;
  report.sigma = sigma;
  const double contraction = 1.0 - 1.0 / (2.0 * kappa);
  report.bound = contraction * contraction;

  for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
    const IterateRecord& cur = traj.records[i];
    const IterateRecord& nxt = traj.records[i + 1];
    const double pot_cur = cur.a * cur.a + sigma * cur.b;
    const double pot_nxt = nxt.a * nxt.a + sigma * nxt.b;
    if (!(pot_cur > 0.0)) continue;
    const double ratio = pot_nxt / pot_cur;
    report.per_step_ratios.push_back(ratio);
    if (ratio > report.bound) ++report.violations;
  }

  // Tail fit of log(dist) against k; needs a usable stretch above the
  // floating-point floor.
  std::vector<double> ks, logs;
  for (const IterateRecord& rec : traj.records) {
    if (std::isfinite(rec.dist) && rec.dist > 1e-13) {
      ks.push_back(static_cast<double>(rec.k));
      logs.push_back(std::log(rec.dist));
    }
  }
  const std::size_t tail = std::min<std::size_t>(ks.size(), 60);
  if (tail < 10) {
    report.asymptotic_rate = kNaN;
    return report;
  }
  const std::size_t start = ks.size() - tail;
  double mean_k = 0.0, mean_l = 0.0;
  for (std::size_t i = start; i < ks.size(); ++i) {
    mean_k += ks[i];
    mean_l += logs[i];
  }
  mean_k /= static_cast<double>(tail);
  mean_l /= static_cast<double>(tail);
  double num = 0.0, den = 0.0;
  for (std::size_t i = start; i < ks.size(); ++i) {
    num += (ks[i] - mean_k) * (logs[i] - mean_l);
    den += (ks[i] - mean_k) * (ks[i] - mean_k);
  }
  report.asymptotic_rate = den > 0.0 ? std::exp(num / den) : kNaN;
  return report;
}

std::pair<double, RateReport> sigma_search(const Trajectory& traj, double kappa) {
  double best_sigma = 0.0;
  RateReport best_report;
  bool have = false;
  for (int i = 0; i < 25; ++i) {
    const double sigma = std::pow(10.0, -6.0 + 6.0 * static_cast<double>(i) / 24.0);
    RateReport report = check_local_rate(traj, kappa, sigma);
    if (!have || report.violations <= best_report.violations) {
      best_sigma = sigma;
      best_report = std::move(report);
      have = true;
    }
  }
  return {best_sigma, best_report};
}

GlobalCheck check_global(const Trajectory& traj, double eps) {
  if (traj.records.empty()) throw InsufficientDataError("tube audit needs records");
  GlobalCheck check;
  check.eps = eps;
  check.min_rgrad_norm = std::numeric_limits<double>::infinity();
  for (const IterateRecord& rec : traj.records) {
    check.max_feas = std::max(check.max_feas, rec.feas);
    check.min_rgrad_norm = std::min(check.min_rgrad_norm, rec.rgrad_norm);
  }
  check.in_tube = check.max_feas <= eps;
  return check;
}

double tube_stepsize(double eps, double beta_F, double G_f) {
  if (!(eps > 0.0) || !(beta_F > 0.0) || !(G_f > 0.0)) {
    throw std::invalid_argument("tube_stepsize: eps, beta_F, G_f must be positive");
  }
  return std::sqrt(eps / (2.0 * beta_F * G_f * G_f));
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) throw InsufficientDataError("log-log fit needs two positive pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(den > 0.0)) throw InsufficientDataError("log-log fit needs distinct abscissae");
  return num / den;
}

Eigen::VectorXd sqp_step_reference_kkt(const Problem& problem, const Eigen::VectorXd& x,
                                       double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("stepsize must be positive");
  const int n = problem.n;
  const int m = problem.m;
  const Eigen::VectorXd grad = problem.grad_f(x);
  const Eigen::MatrixXd jac = problem.constraint_jac(x);
  const Eigen::VectorXd constraint_val = problem.constraint(x);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const double sigma_max = svd.singularValues()(0);
  const double sigma_min = svd.singularValues()(std::min(n, m) - 1);
  const double tol = rank_tolerance(sigma_max);
  if (!(sigma_min > tol)) throw RankDeficientError(sigma_min, tol);

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = (1.0 / eta) * Eigen::MatrixXd::Identity(n, n);
  kkt.topRightCorner(n, m) = jac.transpose();
  kkt.bottomLeftCorner(m, n) = jac;
  Eigen::VectorXd rhs(n + m);
  rhs.head(n) = -grad;
  rhs.tail(m) = -constraint_val;

  const Eigen::VectorXd solution = kkt.partialPivLu().solve(rhs);
  return x + solution.head(n);
}

double derivative_max_rel_error(const Problem& problem, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const int n = problem.n;
  const Eigen::VectorXd grad = problem.grad_f(x);
  const Eigen::MatrixXd jac = problem.constraint_jac(x);

  Eigen::VectorXd fd_grad(n);
  Eigen::MatrixXd fd_jac(problem.m, n);
  Eigen::VectorXd probe = x;
  for (int i = 0; i < n; ++i) {
    probe(i) = x(i) + h;
    const double f_plus = problem.f(probe);
    const Eigen::VectorXd c_plus = problem.constraint(probe);
    probe(i) = x(i) - h;
    const double f_minus = problem.f(probe);
    const Eigen::VectorXd c_minus = problem.constraint(probe);
    probe(i) = x(i);
    fd_grad(i) = (f_plus - f_minus) / (2.0 * h);
    fd_jac.col(i) = (c_plus - c_minus) / (2.0 * h);
  }

  const double grad_scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
  const double jac_scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
  const double grad_err = (fd_grad - grad).cwiseAbs().maxCoeff() / grad_scale;
  const double jac_err = (fd_jac - jac).cwiseAbs().maxCoeff() / jac_scale;
  return std::max(grad_err, jac_err);
}

SphereConstants sphere_tube_constants(const EigenInstance& instance, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::invalid_argument("tube constants need 0 < eps < 1");
  }
  const double lambda_lo = instance.eigenvalues.minCoeff();
  const double lambda_abs = instance.eigenvalues.cwiseAbs().maxCoeff();
  SphereConstants constants;
  constants.beta_F = 2.0;
  constants.gamma_F = 2.0 * std::sqrt(1.0 - eps);
  constants.G_f = lambda_abs * std::sqrt(1.0 + eps);
  constants.beta_f = lambda_abs;
  constants.L_f = constants.G_f;
  constants.f_lower =
      lambda_lo < 0.0 ? 0.5 * lambda_lo * (1.0 + eps) : 0.5 * lambda_lo * (1.0 - eps);
  return constants;
}

SphereConstants sphere_ball_constants(const EigenInstance& instance, double r) {
  if (!(r > 0.0) || !(r < 1.0)) {
    throw std::invalid_argument("ball constants need 0 < r < 1");
  }
  const double lambda_abs = instance.eigenvalues.cwiseAbs().maxCoeff();
  const double grad_at_star = (instance.A * instance.x_star).norm();
  const double f_at_star = 0.5 * instance.x_star.dot(instance.A * instance.x_star);
  SphereConstants constants;
  constants.beta_F = 2.0;
  constants.gamma_F = 2.0 * (1.0 - r);
  constants.G_f = lambda_abs * (1.0 + r);
  constants.beta_f = lambda_abs;
  constants.L_f = grad_at_star + lambda_abs * r;
  constants.f_lower = f_at_star - constants.L_f * r;
  return constants;
}

}  // namespace manisolve
