#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace manisolve {

enum class Termination {
  kConverged,      ///< projected-gradient norm fell to grad_tol
  kMaxIters,       ///< iteration budget exhausted
  kDiverged,       ///< constraint violation blew past feas_cap
  kRankDeficient,  ///< constraint qualification failed along the path
};

std::string termination_name(Termination t);

struct SolverConfig {
  double eta = 0.1;          ///< stepsize, > 0
  int max_iters = 1000;      ///< number of steps allowed, >= 1
  double grad_tol = 1e-10;   ///< stop when |rgrad| <= grad_tol
  std::optional<double> feas_cap = 1e6;  ///< divergence guard on |F(x)|
  bool record_iterates = false;          ///< store x in every record
};

/// Per-iteration diagnostics. The tangent/normal distances a, b and the
/// distance to the minimizer are NaN when x_star was not supplied.
struct IterateRecord {
  int k = 0;
  double f_val = 0.0;
  double feas = 0.0;        ///< |F(x_k)|
  double rgrad_norm = 0.0;  ///< |P_x grad_f(x_k)|
  double a = 0.0;
  double b = 0.0;
  double dist = 0.0;  ///< |x_k - x_star|
  std::optional<Eigen::VectorXd> x;
};

struct Trajectory {
  std::vector<IterateRecord> records;  ///< indexed 0..K contiguously
  Termination termination = Termination::kMaxIters;
  SolverConfig config;
};

/// CSV with header `k,f,feas,rgrad_norm,a,b,dist`, one row per record,
/// doubles printed with full round-trip precision so repeated runs are
/// byte-identical.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& file);

/// As above plus a trailing `deviation` column holding |x_k - other_k| for
/// a twin run from the same start. Requires recorded iterates on both.
void write_comparison_csv(const Trajectory& traj, const Trajectory& other,
                          const std::filesystem::path& file);

/// One-line JSON summary: {"termination": ..., "iters": K, "final_rgrad_norm": ...}.
std::string trajectory_summary(const Trajectory& traj);

}  // namespace manisolve
