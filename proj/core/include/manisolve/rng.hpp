#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace manisolve {

/// All stochastic operations take an explicit seed; there is no global RNG.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Deterministically derives an independent seed stream from a base seed.
/// Used by the harness so each run in an experiment gets its own stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Column-by-column fill so the draw order is part of the determinism contract.
inline Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

inline Eigen::VectorXd unit_sphere_vector(Rng& rng, int n) {
  Eigen::VectorXd v = gaussian_vector(rng, n);
  double norm = v.norm();
  while (norm == 0.0) {  // astronomically unlikely, but keeps the map total
    v = gaussian_vector(rng, n);
    norm = v.norm();
  }
  return v / norm;
}

/// Uniform draw from the closed ball of the given radius around the origin.
inline Eigen::VectorXd ball_vector(Rng& rng, int n, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd dir = unit_sphere_vector(rng, n);
  double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
  return r * dir;
}

}  // namespace manisolve
