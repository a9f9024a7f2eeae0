#include <cstdint>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manisolve/errors.hpp"
#include "manisolve/harness.hpp"

namespace {

int dispatch_experiment(const manisolve::ExperimentSpec& spec) {
  const int rank_failures = manisolve::run_experiment(spec);
  if (rank_failures > 0) {
    std::cerr << "error: " << rank_failures << " run(s) hit a rank failure\n";
    return 3;
  }
  return 0;
}

int dispatch_check(std::uint64_t seed, const std::string& out_dir) {
  const std::vector<manisolve::CheckResult> results = manisolve::run_check_suite(seed, out_dir);
  bool all_pass = true;
  char buf[160];
  for (const manisolve::CheckResult& result : results) {
    std::snprintf(buf, sizeof(buf), "%s %-32s statistic=%.6g threshold=%.6g n=%d",
                  result.pass ? "PASS" : "FAIL", result.check_name.c_str(), result.statistic,
                  result.threshold, result.n_samples);
    std::cout << buf << "\n";
    all_pass = all_pass && result.pass;
  }
  std::cout << (all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order solver for smooth equality-constrained minimization"};
  app.require_subcommand(1);

  manisolve::ExperimentSpec exp_spec;
  std::string exp_kind = "vary-kappa";
  std::string exp_out;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "run a sweep over conditioning / start radius and write trajectories");
  experiment->add_option("--kind", exp_kind, "sweep kind")
      ->check(CLI::IsMember({"vary-kappa", "vary-radius", "compare-rgd", "global-decay"}));
  experiment->add_option("--n", exp_spec.n, "ambient dimension")->check(CLI::Range(3, 100000));
  experiment->add_option("--kappa", exp_spec.kappas, "conditioning values (comma separated)")
      ->delimiter(',');
  experiment
      ->add_option("--radius", exp_spec.radii,
                   "start radii, or tube widths for global-decay (comma separated)")
      ->delimiter(',');
  experiment->add_option("--instances", exp_spec.instances, "instances per cell")
      ->check(CLI::Range(1, 10000));
  experiment->add_option("--seed", exp_spec.seed, "base seed");
  experiment->add_option("--out", exp_out, "output directory")->required();
  experiment->add_flag("--full", exp_spec.full, "long-run scale (n = 1000)");

  std::uint64_t check_seed = 0;
  std::string check_out;
  CLI::App* check = app.add_subcommand("check", "run the numerical verification battery");
  check->add_option("--seed", check_seed, "base seed");
  check->add_option("--out", check_out, "report directory")->required();

  manisolve::SolveOptions solve_options;
  std::string solve_file;
  std::string solve_out;
  CLI::App* solve = app.add_subcommand("solve", "solve one instance described by a JSON spec");
  solve->add_option("file", solve_file, "instance spec (JSON with n, kappa, seed, eps)")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--eta", solve_options.eta,
                    "stepsize (omit or 0 for the curvature-based default)");
  solve->add_option("--max-iters", solve_options.max_iters, "iteration budget")
      ->check(CLI::Range(1, 10000000));
  solve->add_option("--method", solve_options.method, "sqp or rgd")
      ->check(CLI::IsMember({"sqp", "rgd"}));
  solve->add_option("--out", solve_out, "directory for trajectory.csv and summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*experiment) {
      exp_spec.kind = manisolve::parse_experiment_kind(exp_kind);
      exp_spec.out_dir = exp_out;
      return dispatch_experiment(exp_spec);
    }
    if (*check) return dispatch_check(check_seed, check_out);
    if (*solve) {
      solve_options.spec_file = solve_file;
      solve_options.out_dir = solve_out;
      return manisolve::run_solve(solve_options);
    }
  } catch (const manisolve::RankDeficientError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const manisolve::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
