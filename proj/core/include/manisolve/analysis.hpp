#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "manisolve/geometry.hpp"
#include "manisolve/problem.hpp"
#include "manisolve/trajectory.hpp"

namespace manisolve {

/// Constants measured by sampling around a minimizer, plus the fitted
/// coefficients of the gradient expansion remainder bound
/// |r(x)| <= C_r1 |x - x_star|^2 + C_r2 * b(x).
struct EstimatedConstants {
  double beta_P_hat = 0.0;   ///< Lipschitz constant of x -> P_x
  double beta_D_hat = 0.0;   ///< Lipschitz constant of x -> pinv(J(x))
  double beta_E_hat = 0.0;   ///< Lipschitz constant of x -> P_x grad_f(x)
  double beta_F_hat = 0.0;   ///< Lipschitz constant of x -> J(x)
  double gamma_F_hat = 0.0;  ///< smallest singular value of J seen on samples
  double G_f_hat = 0.0;      ///< largest |grad_f| seen on samples
  double C_r1_hat = 0.0;
  double C_r2_hat = 0.0;
  double radius = 0.0;
  int n_samples = 0;
};

/// Exact gradient expansion remainder at x:
///   r(x) = P_x grad_f(x) - H_star (x - x_star).
Eigen::VectorXd taylor_remainder(const Problem& problem, const Eigen::VectorXd& x_star,
                                 const Eigen::VectorXd& x);

struct ExpansionCheck {
  double remainder_norm = 0.0;
  double bound = 0.0;  ///< C_r1 |x-x_star|^2 + C_r2 b(x)
  bool pass = false;   ///< remainder_norm <= bound
  double a = 0.0;
  double b = 0.0;
};

/// Evaluates the fitted remainder bound at one point.
ExpansionCheck check_expansion_terms(const Problem& problem, const Eigen::VectorXd& x_star,
                                     const Eigen::VectorXd& x,
                                     const EstimatedConstants& consts);

/// Samples pairs/points in the ball of the given radius around x_star,
/// measures the Lipschitz constants by maximizing difference quotients, and
/// calibrates (C_r1, C_r2) so the remainder bound holds on every calibration
/// sample with margin. Deterministic in (seed, n_samples).
EstimatedConstants estimate_constants(const Problem& problem, const Eigen::VectorXd& x_star,
                                      double radius, int n_samples, std::uint64_t seed);

/// Per-step contraction audit of the potential a^2 + sigma * b against the
/// guaranteed factor (1 - 1/(2 kappa))^2.
struct RateReport {
  std::vector<double> per_step_ratios;  ///< potential_{k+1} / potential_k
  double bound = 0.0;                   ///< (1 - 1/(2 kappa))^2
  double sigma = 0.0;
  int violations = 0;          ///< steps with ratio > bound
  double asymptotic_rate = 0.0;  ///< tail fit of dist_{k+1}/dist_k, NaN if too short
};

/// Audits a recorded trajectory (a, b, dist columns must be present).
/// Throws InsufficientDataError with fewer than three records.
RateReport check_local_rate(const Trajectory& traj, double kappa, double sigma);

/// Scans sigma over a log grid in [1e-6, 1] (25 points) and returns the
/// report minimizing the violation count; ties break toward larger sigma.
std::pair<double, RateReport> sigma_search(const Trajectory& traj, double kappa);

/// Tube audit for a run that is allowed to leave the constraint set.
struct GlobalCheck {
  double max_feas = 0.0;       ///< max over k of |F(x_k)|
  bool in_tube = false;        ///< max_feas <= eps
  double min_rgrad_norm = 0.0;  ///< min over k of |P_x grad_f(x_k)|
  double eps = 0.0;
};

GlobalCheck check_global(const Trajectory& traj, double eps);

/// Stepsize sqrt(eps / (2 beta_F G_f^2)) keeping iterates in the tube
/// |F(x)| <= eps.
double tube_stepsize(double eps, double beta_F, double G_f);

/// Least-squares slope of log(y) against log(x); pairs with a nonpositive
/// coordinate are skipped. Throws InsufficientDataError with fewer than two
/// usable pairs.
double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// The same update as sqp_step obtained through the quadratic subprogram:
///   minimize  g' d + (1/2 eta) |d|^2   s.t.  J d + F = 0,
/// solved via the dense KKT system. Exists as an independent route for
/// cross-checking the closed form.
Eigen::VectorXd sqp_step_reference_kkt(const Problem& problem, const Eigen::VectorXd& x,
                                       double eta);

/// Max relative error between analytic and central-difference derivatives at
/// x (gradient of f and Jacobian of F).
double derivative_max_rel_error(const Problem& problem, const Eigen::VectorXd& x, double h);

/// Analytic constants for f(x) = x' A x / 2 on the unit sphere, valid on the
/// region |F(x)| <= eps (tube) or |x - x_star| <= r with r < 1 (ball).
struct SphereConstants {
  double beta_F = 0.0;
  double gamma_F = 0.0;
  double G_f = 0.0;
  double beta_f = 0.0;  ///< Lipschitz constant of grad_f, = |A|_2
  double L_f = 0.0;     ///< Lipschitz constant of f on the region
  double f_lower = 0.0;
};

SphereConstants sphere_tube_constants(const EigenInstance& instance, double eps);
SphereConstants sphere_ball_constants(const EigenInstance& instance, double r);

}  // namespace manisolve
