#include "manisolve/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "manisolve/analysis.hpp"
#include "manisolve/errors.hpp"
#include "manisolve/riemannian.hpp"
#include "manisolve/rng.hpp"
#include "manisolve/sqp.hpp"
#include "manisolve/trajectory.hpp"

namespace manisolve {

namespace {

std::string g_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-cell aggregate: median of dist and rgrad_norm across instances at each
// step, truncated to the shortest run so rows stay aligned.
void write_median_csv(const std::vector<Trajectory>& cell, const std::filesystem::path& file) {
  std::size_t min_len = std::numeric_limits<std::size_t>::max();
  for (const Trajectory& traj : cell) min_len = std::min(min_len, traj.records.size());
  if (cell.empty() || min_len == 0) return;

  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write aggregate: " + file.string());
  out << "k,dist_median,rgrad_norm_median\n";
  char buf[96];
  for (std::size_t k = 0; k < min_len; ++k) {
    std::vector<double> dists, rgrads;
    dists.reserve(cell.size());
    rgrads.reserve(cell.size());
    for (const Trajectory& traj : cell) {
      dists.push_back(traj.records[k].dist);
      rgrads.push_back(traj.records[k].rgrad_norm);
    }
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k, median(std::move(dists)),
                  median(std::move(rgrads)));
    out << buf;
  }
}

struct RunLog {
  nlohmann::json manifest_runs = nlohmann::json::array();
  int rank_failures = 0;

  void add(const std::string& run_id, const ExperimentSpec& spec, int n_eff, double kappa,
           double radius, std::uint64_t seed, double eta, const std::filesystem::path& csv,
           const Trajectory& traj) {
    nlohmann::json entry;
    entry["run_id"] = run_id;
    entry["kind"] = experiment_kind_name(spec.kind);
    entry["n"] = n_eff;
    entry["kappa"] = kappa;
    entry["radius"] = radius;
    entry["seed"] = seed;
    entry["eta"] = eta;
    entry["csv_path"] = csv.filename().string();
    entry["termination"] = termination_name(traj.termination);
    manifest_runs.push_back(entry);
    if (traj.termination == Termination::kRankDeficient) ++rank_failures;
  }
};

double experiment_stepsize(const EigenInstance& instance) {
  const double spread = instance.eigenvalues.maxCoeff() - instance.eigenvalues.minCoeff();
  return 1.0 / (2.0 * spread);
}

int iteration_budget(double kappa, bool full) {
  const double budget = 60.0 * kappa;
  const double cap = full ? 40000.0 : 20000.0;
  return static_cast<int>(std::min(std::max(budget, 1000.0), cap));
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.n < 3) throw std::invalid_argument("experiment: n must be at least 3");
  if (spec.instances < 1) throw std::invalid_argument("experiment: instances must be at least 1");
  if (spec.kappas.empty()) throw std::invalid_argument("experiment: kappa list is empty");
  if (spec.radii.empty()) throw std::invalid_argument("experiment: radius list is empty");
  for (double kappa : spec.kappas) {
    if (!(kappa > 1.0)) throw std::invalid_argument("experiment: every kappa must exceed 1");
  }
  for (double radius : spec.radii) {
    if (!(radius > 0.0)) throw std::invalid_argument("experiment: every radius must be positive");
  }
  if (spec.out_dir.empty()) throw std::invalid_argument("experiment: output directory required");
}

}  // namespace

std::string experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kVaryKappa: return "vary-kappa";
    case ExperimentKind::kVaryRadius: return "vary-radius";
    case ExperimentKind::kCompareRgd: return "compare-rgd";
    case ExperimentKind::kGlobalDecay: return "global-decay";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "vary-kappa") return ExperimentKind::kVaryKappa;
  if (name == "vary-radius") return ExperimentKind::kVaryRadius;
  if (name == "compare-rgd") return ExperimentKind::kCompareRgd;
  if (name == "global-decay") return ExperimentKind::kGlobalDecay;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

int run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  const int n_eff = spec.full ? 1000 : spec.n;
  std::filesystem::create_directories(spec.out_dir);

  RunLog log;
  std::uint64_t run_index = 0;
  const auto next_seed = [&]() { return derive_seed(spec.seed, run_index++); };

  // Cells: vary-kappa sweeps kappas at the first radius, vary-radius sweeps
  // radii at the first kappa, the other kinds sweep kappas.
  struct Cell {
    double kappa;
    double radius;
  };
  std::vector<Cell> cells;
  if (spec.kind == ExperimentKind::kVaryRadius) {
    for (double radius : spec.radii) cells.push_back({spec.kappas.front(), radius});
  } else {
    for (double kappa : spec.kappas) cells.push_back({kappa, spec.radii.front()});
  }

  for (const Cell& cell : cells) {
    std::vector<Trajectory> cell_trajs;
    const std::string cell_name = experiment_kind_name(spec.kind) + "_kappa" + g_str(cell.kappa) +
                                  "_rad" + g_str(cell.radius);

    for (int inst = 0; inst < spec.instances; ++inst) {
      const std::uint64_t instance_seed = next_seed();
      const std::uint64_t init_seed = next_seed();
      const EigenInstance instance = make_instance(n_eff, cell.kappa, instance_seed);
      const Problem problem = eigenvalue_problem(instance);
      const double eta = experiment_stepsize(instance);
      const std::string run_id = cell_name + "_i" + std::to_string(inst);

      SolverConfig config;
      config.eta = eta;
      config.max_iters = iteration_budget(cell.kappa, spec.full);
      config.grad_tol = 1e-12;

      if (spec.kind == ExperimentKind::kCompareRgd) {
        Eigen::VectorXd x0 = sample_initialization(instance.x_star, cell.radius, init_seed);
        x0 /= x0.norm();
        config.record_iterates = true;

        Trajectory sqp_traj = run_sqp(problem, x0, config, instance.x_star);
        RetractionConfig retraction;
        retraction.mode = RetractionMode::kClosedFormSphere;
        Trajectory rgd_traj = run_rgd(problem, x0, config, retraction, instance.x_star);

        const auto sqp_csv = spec.out_dir / (run_id + "_sqp.csv");
        const auto rgd_csv = spec.out_dir / (run_id + "_rgd.csv");
        write_trajectory_csv(sqp_traj, sqp_csv);
        write_trajectory_csv(rgd_traj, rgd_csv);
        log.add(run_id + "_sqp", spec, n_eff, cell.kappa, cell.radius, instance_seed, eta,
                sqp_csv, sqp_traj);
        log.add(run_id + "_rgd", spec, n_eff, cell.kappa, cell.radius, instance_seed, eta,
                rgd_csv, rgd_traj);

        const std::size_t shared = std::min(sqp_traj.records.size(), rgd_traj.records.size());
        Trajectory sqp_cut = sqp_traj;
        Trajectory rgd_cut = rgd_traj;
        sqp_cut.records.resize(shared);
        rgd_cut.records.resize(shared);
        write_comparison_csv(sqp_cut, rgd_cut, spec.out_dir / (run_id + "_compare.csv"));
        cell_trajs.push_back(std::move(sqp_traj));
        continue;
      }

      Eigen::VectorXd x0;
      if (spec.kind == ExperimentKind::kGlobalDecay) {
        // Start inside the tube |F| <= radius but off the constraint set, at
        // a generic far point, with the stepsize that keeps the tube.
        Rng rng = make_rng(init_seed);
        x0 = std::sqrt(1.0 + cell.radius / 2.0) * unit_sphere_vector(rng, n_eff);
        const SphereConstants constants = sphere_tube_constants(instance, cell.radius);
        config.eta = tube_stepsize(cell.radius, constants.beta_F, constants.G_f);
        config.grad_tol = 0.0;
        config.max_iters = spec.full ? 5000 : 2000;
      } else {
        x0 = sample_initialization(instance.x_star, cell.radius, init_seed);
      }

      Trajectory traj = run_sqp(problem, x0, config, instance.x_star);
      const auto csv = spec.out_dir / (run_id + ".csv");
      write_trajectory_csv(traj, csv);
      log.add(run_id, spec, n_eff, cell.kappa, cell.radius, instance_seed, config.eta, csv, traj);
      cell_trajs.push_back(std::move(traj));
    }

    write_median_csv(cell_trajs, spec.out_dir / ("median_" + cell_name + ".csv"));
  }

  nlohmann::json manifest;
  manifest["kind"] = experiment_kind_name(spec.kind);
  manifest["n"] = n_eff;
  manifest["instances"] = spec.instances;
  manifest["seed"] = spec.seed;
  manifest["full"] = spec.full;
  manifest["runs"] = log.manifest_runs;
  std::ofstream out(spec.out_dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2) << "\n";

  return log.rank_failures;
}

int run_solve(const SolveOptions& options) {
  const InstanceSpec spec = load_instance_spec(options.spec_file);
  if (options.method != "sqp" && options.method != "rgd") {
    throw std::invalid_argument("method must be sqp or rgd");
  }
  if (options.max_iters < 1) throw std::invalid_argument("max-iters must be at least 1");

  const EigenInstance instance = make_instance(spec.n, spec.kappa, spec.seed);
  const Problem problem = eigenvalue_problem(instance);
  Eigen::VectorXd x0 = sample_initialization(instance.x_star, spec.eps, derive_seed(spec.seed, 1));

  SolverConfig config;
  config.eta = options.eta > 0.0 ? options.eta : canonical_stepsize(problem, instance.x_star);
  config.max_iters = options.max_iters;
  config.grad_tol = 1e-10;

  Trajectory traj;
  if (options.method == "rgd") {
    x0 /= x0.norm();
    RetractionConfig retraction;
    retraction.mode = RetractionMode::kClosedFormSphere;
    traj = run_rgd(problem, x0, config, retraction, instance.x_star);
  } else {
    traj = run_sqp(problem, x0, config, instance.x_star);
  }

  std::cout << trajectory_summary(traj) << "\n";
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_trajectory_csv(traj, options.out_dir / "trajectory.csv");
    std::ofstream out(options.out_dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << trajectory_summary(traj) << "\n";
  }

  if (traj.termination == Termination::kConverged) return 0;
  if (traj.termination == Termination::kRankDeficient) return 3;
  return 2;
}

}  // namespace manisolve
