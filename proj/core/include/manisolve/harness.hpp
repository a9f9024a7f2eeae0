#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "manisolve/problem.hpp"

namespace manisolve {

enum class ExperimentKind {
  kVaryKappa,    ///< rate vs conditioning at fixed start radius
  kVaryRadius,   ///< rate vs start radius at fixed conditioning
  kCompareRgd,   ///< twin runs of the two methods from a shared feasible start
  kGlobalDecay,  ///< infeasible starts, tube containment and gradient decay
};

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);  // throws std::invalid_argument

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kVaryKappa;
  int n = 200;
  std::vector<double> kappas = {25.0, 50.0, 100.0};
  std::vector<double> radii = {0.01};
  int instances = 5;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  bool full = false;  ///< scale n up to the long-run size (1000)
};

/// Runs every (kappa, radius, instance) cell, writing per-run trajectory CSVs,
/// per-cell median summary CSVs, and a manifest.json listing all runs.
/// Returns the number of runs that hit a rank failure.
int run_experiment(const ExperimentSpec& spec);

struct CheckResult {
  std::string check_name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

/// Numerical verification battery covering the guarantees the solver is built
/// around. Writes one JSON report per check into out_dir and a combined
/// summary.json. Deterministic in the seed.
std::vector<CheckResult> run_check_suite(std::uint64_t seed, const std::filesystem::path& out_dir);

struct SolveOptions {
  std::filesystem::path spec_file;
  double eta = 0.0;  ///< <= 0 means use the canonical stepsize
  int max_iters = 1000;
  std::string method = "sqp";  ///< "sqp" or "rgd"
  std::filesystem::path out_dir;  ///< empty: print summary only
};

/// Loads an instance spec (JSON: {n, kappa, seed, eps}), builds the problem,
/// runs the requested method, prints the summary line, and optionally writes
/// the trajectory CSV. Returns 0 on convergence, 2 otherwise, 3 on rank
/// failure.
int run_solve(const SolveOptions& options);

}  // namespace manisolve
