#pragma once

#include <stdexcept>
#include <string>

namespace manisolve {

/// Base class for all solver-layer failures.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint Jacobian lost full row rank: the constraint qualification
/// needed for projections and the pseudoinverse does not hold at this point.
class RankDeficientError : public SolverError {
 public:
  RankDeficientError(double sigma_min, double tol)
      : SolverError("constraint Jacobian is rank deficient (sigma_min = " +
                    std::to_string(sigma_min) + ", tol = " + std::to_string(tol) + ")"),
        sigma_min(sigma_min),
        tol(tol) {}
  double sigma_min;
  double tol;
};

/// A second derivative callback was required but not supplied on the Problem.
class MissingHessianError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The restricted Hessian has non-positive top eigenvalue, so no positive
/// curvature-based stepsize exists.
class NonPositiveCurvatureError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Feasibility restoration failed to reach the requested tolerance.
class RetractionError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Too few records to run the requested diagnostic.
class InsufficientDataError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The tangent space is zero-dimensional (as many constraints as variables),
/// so restricted spectral quantities are undefined.
class DegenerateTangentError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace manisolve
