#include "manisolve/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace manisolve {

namespace {

void append_g17(std::string& line, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  line += buf;
}

void append_record(std::string& line, const IterateRecord& rec) {
  line += std::to_string(rec.k);
  line += ',';
  append_g17(line, rec.f_val);
  line += ',';
  append_g17(line, rec.feas);
  line += ',';
  append_g17(line, rec.rgrad_norm);
  line += ',';
  append_g17(line, rec.a);
  line += ',';
  append_g17(line, rec.b);
  line += ',';
  append_g17(line, rec.dist);
}

}  // namespace

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIters: return "max_iters";
    case Termination::kDiverged: return "diverged";
    case Termination::kRankDeficient: return "rank_deficient";
  }
  return "unknown";
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write trajectory: " + file.string());
  out << "k,f,feas,rgrad_norm,a,b,dist\n";
  std::string line;
  for (const IterateRecord& rec : traj.records) {
    line.clear();
    append_record(line, rec);
    out << line << '\n';
  }
}

void write_comparison_csv(const Trajectory& traj, const Trajectory& other,
                          const std::filesystem::path& file) {
  if (traj.records.size() != other.records.size()) {
    throw std::invalid_argument("comparison requires trajectories of equal length");
  }
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write comparison: " + file.string());
  out << "k,f,feas,rgrad_norm,a,b,dist,deviation\n";
  std::string line;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const IterateRecord& rec = traj.records[i];
    const IterateRecord& twin = other.records[i];
    if (!rec.x || !twin.x) {
      throw std::invalid_argument("comparison requires recorded iterates on both runs");
    }
    line.clear();
    append_record(line, rec);
    line += ',';
    append_g17(line, (*rec.x - *twin.x).norm());
    out << line << '\n';
  }
}

std::string trajectory_summary(const Trajectory& traj) {
  nlohmann::json doc;
  doc["termination"] = termination_name(traj.termination);
  doc["iters"] = traj.records.empty() ? 0 : traj.records.back().k;
  doc["final_rgrad_norm"] = traj.records.empty() ? 0.0 : traj.records.back().rgrad_norm;
  return doc.dump();
}

}  // namespace manisolve
