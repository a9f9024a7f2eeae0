#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "manisolve/analysis.hpp"
#include "manisolve/errors.hpp"
#include "manisolve/harness.hpp"
#include "manisolve/riemannian.hpp"
#include "manisolve/rng.hpp"
#include "manisolve/sqp.hpp"

namespace manisolve {

namespace {

CheckResult make_result(const std::string& name, bool pass, double stat, double thr, int n,
                        std::uint64_t seed) {
  CheckResult result;
  result.check_name = name;
  result.pass = pass;
  result.statistic = stat;
  result.threshold = thr;
  result.n_samples = n;
  result.seed = seed;
  return result;
}

int iters_to_dist(const Trajectory& traj, double dist_tol) {
  for (const IterateRecord& rec : traj.records) {
    if (rec.dist <= dist_tol) return rec.k;
  }
  return traj.records.empty() ? 0 : traj.records.back().k + 1;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Analytic and finite-difference derivatives must agree on a healthy problem.
CheckResult check_derivative(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  const Eigen::VectorXd x = sample_initialization(instance.x_star, 0.3, derive_seed(seed, 1));
  const double stat = derivative_max_rel_error(problem, x, 1e-6);
  return make_result("derivative_consistency", stat <= 1e-7, stat, 1e-7, 1, seed);
}

// The same finite-difference audit must flag a deliberately wrong gradient,
// proving the audit has teeth.
CheckResult check_derivative_negative_control(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  Problem problem = eigenvalue_problem(instance);
  const Eigen::MatrixXd a = instance.A;
  problem.grad_f = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 1.05 * (a * x); };
  const Eigen::VectorXd x = sample_initialization(instance.x_star, 0.3, derive_seed(seed, 1));
  const double stat = derivative_max_rel_error(problem, x, 1e-6);
  return make_result("derivative_bug_detected", stat > 1e-3, stat, 1e-3, 1, seed);
}

// Closed-form update vs the equality-constrained quadratic subproblem solved
// through its stationarity system.
CheckResult check_kkt_equivalence(std::uint64_t seed) {
  double worst = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 10 + 2 * t));
    const Problem problem = eigenvalue_problem(instance);
    Rng rng = make_rng(derive_seed(seed, 11 + 2 * t));
    const Eigen::VectorXd x = instance.x_star + ball_vector(rng, 20, 0.5);
    std::uniform_real_distribution<double> log_eta(-3.0, 0.0);
    const double eta = std::pow(10.0, log_eta(rng));
    const Eigen::VectorXd direct = sqp_step(problem, x, eta);
    const Eigen::VectorXd via_kkt = sqp_step_reference_kkt(problem, x, eta);
    worst = std::max(worst, (direct - via_kkt).norm() / std::max(1.0, direct.norm()));
  }
  return make_result("quadratic_subproblem_equivalence", worst <= 1e-9, worst, 1e-9, trials, seed);
}

// For the sphere problem the update has an explicit elementary form.
CheckResult check_sphere_closed_form(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  Rng rng = make_rng(derive_seed(seed, 1));
  const double eta = 0.05;
  double worst = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = instance.x_star + ball_vector(rng, 20, 0.5);
    const double sq = x.squaredNorm();
    const Eigen::VectorXd ax = instance.A * x;
    const Eigen::VectorXd explicit_next =
        ((sq + 1.0) / (2.0 * sq)) * x - eta * (ax - x * (x.dot(ax) / sq));
    worst = std::max(worst, (sqp_step(problem, x, eta) - explicit_next).norm());
  }
  return make_result("sphere_step_closed_form", worst <= 1e-10, worst, 1e-10, trials, seed);
}

// The gradient-expansion remainder must shrink quadratically for feasible
// approaches to the minimizer.
CheckResult check_remainder_decay(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  Rng rng = make_rng(derive_seed(seed, 1));
  std::vector<double> radii, peaks;
  for (int j = 0; j <= 6; ++j) {
    const double radius = std::pow(10.0, -1.0 - 0.5 * j);
    double peak = 0.0;
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd x = instance.x_star + radius * unit_sphere_vector(rng, 20);
      x /= x.norm();
      peak = std::max(peak, taylor_remainder(problem, instance.x_star, x).norm());
    }
    radii.push_back(radius);
    peaks.push_back(peak);
  }
  const double slope = fit_loglog_slope(radii, peaks);
  return make_result("remainder_quadratic_decay", slope >= 1.9, slope, 1.9, 7 * 20, seed);
}

// Coefficients calibrated at one radius must envelope the remainder on fresh
// samples at a much smaller radius.
CheckResult check_remainder_holdout(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  const EstimatedConstants consts =
      estimate_constants(problem, instance.x_star, 1e-2, 400, derive_seed(seed, 1));
  Rng rng = make_rng(derive_seed(seed, 2));
  const int holdout = 200;
  int passed = 0;
  for (int s = 0; s < holdout; ++s) {
    const Eigen::VectorXd x = instance.x_star + ball_vector(rng, 20, 1e-3);
    if (check_expansion_terms(problem, instance.x_star, x, consts).pass) ++passed;
  }
  const double frac = static_cast<double>(passed) / holdout;
  return make_result("remainder_bound_holdout", passed == holdout, frac, 1.0, holdout, seed);
}

struct LipschitzChecks {
  CheckResult projector;
  CheckResult pinv;
  CheckResult gradient;
};

// Measured Lipschitz constants of the projector, pseudoinverse and projected
// gradient must respect their closed-form bounds from the constraint data.
LipschitzChecks check_lipschitz_bounds(std::uint64_t seed) {
  const double radius = 0.1;
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  const int samples = 501;
  const EstimatedConstants consts =
      estimate_constants(problem, instance.x_star, radius, samples, derive_seed(seed, 1));
  const SphereConstants exact = sphere_ball_constants(instance, radius);

  const double bound_p = 2.0 * exact.beta_F / exact.gamma_F;
  const double bound_d = 2.0 * exact.beta_F / (exact.gamma_F * exact.gamma_F);
  const double bound_e = bound_p * exact.L_f + exact.beta_f;

  LipschitzChecks out;
  const double rp = consts.beta_P_hat / bound_p;
  const double rd = consts.beta_D_hat / bound_d;
  const double re = consts.beta_E_hat / bound_e;
  out.projector = make_result("projector_lipschitz_bound", rp <= 1.0, rp, 1.0, samples - 1, seed);
  out.pinv = make_result("pseudoinverse_lipschitz_bound", rd <= 1.0, rd, 1.0, samples - 1, seed);
  out.gradient = make_result("gradient_lipschitz_bound", re <= 1.0, re, 1.0, samples - 1, seed);
  return out;
}

Trajectory local_reference_run(std::uint64_t seed, double kappa) {
  const EigenInstance instance = make_instance(50, kappa, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  const Eigen::VectorXd x0 = sample_initialization(instance.x_star, 1e-3, derive_seed(seed, 1));
  SolverConfig config;
  config.eta = canonical_stepsize(problem, instance.x_star);
  config.max_iters = 200;
  config.grad_tol = 1e-9;
  return run_sqp(problem, x0, config, instance.x_star);
}

// Near the minimizer the coupled potential must contract at the guaranteed
// per-step factor, for some weight found by grid search.
CheckResult check_potential_contraction(std::uint64_t seed) {
  const double kappa = 10.0;
  const Trajectory traj = local_reference_run(seed, kappa);
  const auto [sigma, report] = sigma_search(traj, kappa);
  (void)sigma;
  const int steps = static_cast<int>(report.per_step_ratios.size());
  return make_result("potential_contraction", report.violations == 0,
                     static_cast<double>(report.violations), 0.0, steps, seed);
}

// The tail distance decay must match the predicted asymptotic factor.
CheckResult check_asymptotic_rate(std::uint64_t seed) {
  const double kappa = 10.0;
  const Trajectory traj = local_reference_run(seed, kappa);
  const RateReport report = check_local_rate(traj, kappa, 1e-3);
  const double target = 1.0 - 1.0 / kappa;
  const double stat = std::abs(report.asymptotic_rate - target);
  return make_result("asymptotic_distance_rate", stat <= 0.05, stat, 0.05,
                     static_cast<int>(traj.records.size()), seed);
}

// The off-constraint error component must be second order in the distance.
CheckResult check_normal_second_order(std::uint64_t seed) {
  const EigenInstance instance = make_instance(50, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  Eigen::VectorXd x0 = sample_initialization(instance.x_star, 1e-3, derive_seed(seed, 1));
  x0 /= x0.norm();
  SolverConfig config;
  config.eta = canonical_stepsize(problem, instance.x_star);
  config.max_iters = 400;
  config.grad_tol = 1e-11;
  const Trajectory traj = run_sqp(problem, x0, config, instance.x_star);
  std::vector<double> dists, bs;
  for (const IterateRecord& rec : traj.records) {
    if (rec.b > 1e-14 && rec.dist > 0.0) {
      dists.push_back(rec.dist);
      bs.push_back(rec.b);
    }
  }
  if (dists.size() < 5) {
    return make_result("normal_error_second_order", false, 0.0, 1.9,
                       static_cast<int>(dists.size()), seed);
  }
  const double slope = fit_loglog_slope(dists, bs);
  return make_result("normal_error_second_order", slope >= 1.9, slope, 1.9,
                     static_cast<int>(dists.size()), seed);
}

// Iteration counts to a fixed accuracy must scale linearly with conditioning:
// doubling kappa should roughly double the count.
CheckResult check_conditioning_scaling(std::uint64_t seed) {
  const int instances = 5;
  std::vector<double> iters_10, iters_20;
  for (int i = 0; i < instances; ++i) {
    for (double kappa : {10.0, 20.0}) {
      const std::uint64_t s0 = derive_seed(seed, 100 + 4 * static_cast<std::uint64_t>(i) +
                                                     (kappa == 10.0 ? 0 : 2));
      const EigenInstance instance = make_instance(50, kappa, s0);
      const Problem problem = eigenvalue_problem(instance);
      const Eigen::VectorXd x0 =
          sample_initialization(instance.x_star, 1e-2, derive_seed(seed, 101 + 4 * i));
      SolverConfig config;
      config.eta = 1.0 / (2.0 * kappa);
      config.max_iters = 4000;
      config.grad_tol = 0.0;
      const Trajectory traj = run_sqp(problem, x0, config, instance.x_star);
      const double iters = static_cast<double>(iters_to_dist(traj, 1e-8));
      (kappa == 10.0 ? iters_10 : iters_20).push_back(iters);
    }
  }
  const double ratio = median_of(iters_20) / median_of(iters_10);
  const double stat = std::abs(ratio - 2.0);
  return make_result("conditioning_scaling", stat <= 0.3, stat, 0.3, 2 * instances, seed);
}

// With the tube stepsize, iterates started inside the tube must stay there.
CheckResult check_tube_containment(std::uint64_t seed) {
  const double eps = 1e-4;
  const EigenInstance instance = make_instance(30, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  const SphereConstants constants = sphere_tube_constants(instance, eps);
  Rng rng = make_rng(derive_seed(seed, 1));
  const Eigen::VectorXd x0 = std::sqrt(1.0 + eps / 2.0) * unit_sphere_vector(rng, 30);
  SolverConfig config;
  config.eta = tube_stepsize(eps, constants.beta_F, constants.G_f);
  config.max_iters = 2000;
  config.grad_tol = 0.0;
  const Trajectory traj = run_sqp(problem, x0, config, instance.x_star);
  const GlobalCheck global = check_global(traj, eps);
  const double stat = global.max_feas / eps;
  return make_result("tube_containment", global.in_tube, stat, 1.0,
                     static_cast<int>(traj.records.size()), seed);
}

// Best-seen stationarity after k steps (with the k-matched tube width) must
// decay with k at a clear polynomial rate.
CheckResult check_stationarity_decay(std::uint64_t seed) {
  const EigenInstance instance = make_instance(30, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  Rng rng = make_rng(derive_seed(seed, 1));
  const Eigen::VectorXd direction = unit_sphere_vector(rng, 30);

  std::vector<double> ks, best_sq;
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double k : {100.0, 1000.0, 10000.0}) {
    const double eps = 1.0 / k;
    const SphereConstants constants = sphere_tube_constants(instance, eps);
    SolverConfig config;
    config.eta = tube_stepsize(eps, constants.beta_F, constants.G_f);
    config.max_iters = static_cast<int>(k);
    config.grad_tol = 0.0;
    const Eigen::VectorXd x0 = std::sqrt(1.0 + eps / 2.0) * direction;
    const Trajectory traj = run_sqp(problem, x0, config, instance.x_star);
    const GlobalCheck global = check_global(traj, eps);
    const double min_sq = global.min_rgrad_norm * global.min_rgrad_norm;
    if (min_sq > prev) monotone = false;
    prev = min_sq;
    ks.push_back(k);
    best_sq.push_back(min_sq);
  }
  const double slope = fit_loglog_slope(ks, best_sq);
  return make_result("stationarity_decay_slope", monotone && slope <= -0.2, slope, -0.2, 3, seed);
}

// One step of the two methods from the same feasible point must differ only
// at second order in the stepsize.
CheckResult check_method_deviation(std::uint64_t seed) {
  const EigenInstance instance = make_instance(20, 10.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  Eigen::VectorXd x0 = sample_initialization(instance.x_star, 0.1, derive_seed(seed, 1));
  x0 /= x0.norm();
  const GeometryFrame frame = frame_at(problem, x0);
  std::vector<double> etas, devs;
  for (double eta : {1e-1, 1e-2, 1e-3}) {
    const Eigen::VectorXd sqp_next = sqp_step(problem, frame, eta);
    Eigen::VectorXd rgd_next = x0 - eta * frame.rgrad;
    rgd_next /= rgd_next.norm();
    etas.push_back(eta);
    devs.push_back((sqp_next - rgd_next).norm());
  }
  const double slope = fit_loglog_slope(etas, devs);
  return make_result("method_deviation_order", slope >= 1.9, slope, 1.9, 3, seed);
}

// Rank collapse must surface as the dedicated failure signal, and bad
// instance parameters must be rejected.
CheckResult check_failure_modes(std::uint64_t seed) {
  const EigenInstance instance = make_instance(10, 5.0, derive_seed(seed, 0));
  const Problem problem = eigenvalue_problem(instance);
  int hits = 0;
  try {
    pseudoinverse(problem.constraint_jac(Eigen::VectorXd::Zero(10)));
  } catch (const RankDeficientError&) {
    ++hits;
  }
  SolverConfig config;
  config.eta = 0.1;
  config.max_iters = 5;
  const Trajectory traj = run_sqp(problem, Eigen::VectorXd::Zero(10), config);
  if (traj.termination == Termination::kRankDeficient && traj.records.empty()) ++hits;
  try {
    make_instance(10, 1.0, derive_seed(seed, 1));
  } catch (const std::invalid_argument&) {
    ++hits;
  }
  return make_result("failure_modes_reported", hits == 3, static_cast<double>(hits), 3.0, 3, seed);
}

}  // namespace

std::vector<CheckResult> run_check_suite(std::uint64_t seed,
                                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<CheckResult> results;
  results.push_back(check_derivative(derive_seed(seed, 1)));
  results.push_back(check_derivative_negative_control(derive_seed(seed, 2)));
  results.push_back(check_kkt_equivalence(derive_seed(seed, 3)));
  results.push_back(check_sphere_closed_form(derive_seed(seed, 4)));
  results.push_back(check_remainder_decay(derive_seed(seed, 5)));
  results.push_back(check_remainder_holdout(derive_seed(seed, 6)));
  const LipschitzChecks lipschitz = check_lipschitz_bounds(derive_seed(seed, 7));
  results.push_back(lipschitz.projector);
  results.push_back(lipschitz.pinv);
  results.push_back(lipschitz.gradient);
  results.push_back(check_potential_contraction(derive_seed(seed, 8)));
  results.push_back(check_asymptotic_rate(derive_seed(seed, 9)));
  results.push_back(check_normal_second_order(derive_seed(seed, 10)));
  results.push_back(check_conditioning_scaling(derive_seed(seed, 11)));
  results.push_back(check_tube_containment(derive_seed(seed, 12)));
  results.push_back(check_stationarity_decay(derive_seed(seed, 13)));
  results.push_back(check_method_deviation(derive_seed(seed, 14)));
  results.push_back(check_failure_modes(derive_seed(seed, 15)));

  nlohmann::json all = nlohmann::json::array();
  bool all_pass = true;
  for (const CheckResult& result : results) {
    nlohmann::json doc;
    doc["check_name"] = result.check_name;
    doc["pass"] = result.pass;
    doc["statistic"] = result.statistic;
    doc["threshold"] = result.threshold;
    doc["n_samples"] = result.n_samples;
    doc["seed"] = result.seed;
    std::ofstream out(out_dir / ("check_" + result.check_name + ".json"));
    if (!out) throw std::runtime_error("cannot write check report");
    out << doc.dump(2) << "\n";
    all.push_back(doc);
    all_pass = all_pass && result.pass;
  }
  nlohmann::json summary;
  summary["seed"] = seed;
  summary["all_pass"] = all_pass;
  summary["checks"] = all;
  std::ofstream out(out_dir / "summary.json");
  if (!out) throw std::runtime_error("cannot write summary.json");
  out << summary.dump(2) << "\n";
  return results;
}

}  // namespace manisolve
