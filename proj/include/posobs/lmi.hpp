#pragma once

// Feasibility solver for small dense LMI problems:
//
//   find z  s.t.  F_k(z) = F_k0 + sum_i z_i F_ki  <= -margin_k * I   (every k)
//                 G_j(z) = G_j0 + sum_i z_i G_ji  >= -slack_j       (elementwise, every j)
//                 lower <= z <= upper
//
// The solver runs a bound-propagation presolve (which can certify trivial
// infeasibility) followed by a phase-1 log-barrier Newton method that
// minimizes a common bound t on lambda_max(F_k) and -G_j. It stops as soon
// as the current iterate satisfies the problem as stated.

#include "posobs/matcore.hpp"

#include <limits>
#include <string>
#include <vector>

namespace posobs::lmi {

inline constexpr double kDefaultMargin = 1e-6;
inline constexpr double kDefaultSlack = 1e-9;
inline constexpr double kDefaultPositiveLower = 1e-6;
inline constexpr double kDefaultUpper = 1e6;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// F(z) negative definite with margin: lambda_max(F(z)) <= -margin.
struct MatrixConstraint {
  std::string name;
  Matrix constant;
  std::vector<Matrix> coefficients;  // one symmetric matrix per decision variable
  double margin = kDefaultMargin;
};

/// G(z) >= -slack entry by entry.
struct ElementwiseConstraint {
  std::string name;
  Matrix constant;
  std::vector<Matrix> coefficients;  // one matrix per decision variable
  double slack = kDefaultSlack;
};

struct LmiFeasibilityProblem {
  int dim = 0;
  std::vector<std::string> variable_names;  // optional, size 0 or dim
  std::vector<MatrixConstraint> matrix_constraints;
  std::vector<ElementwiseConstraint> elementwise_constraints;
  Vector lower_bounds;
  Vector upper_bounds;

  /// Throws InvalidInput on any dimension, symmetry, or bound inconsistency.
  void validate() const;
};

enum class LmiStatus { Feasible, Infeasible, Undetermined };

std::string to_string(LmiStatus s);

struct LmiOutcome {
  LmiStatus status = LmiStatus::Undetermined;
  Vector z;  // the returned point when Feasible, the last iterate otherwise
  int iterations = 0;
  double worst_violation = kInf;  // > 0 means some constraint is violated at z
  std::string detail;             // certificate or reason for non-Feasible outcomes
};

struct SolveOptions {
  int max_iters = 50000;          // Newton steps
  double barrier_growth = 8.0;
  double centering_tol = 1e-10;   // Newton decrement^2 / 2
  double gap_tol = 1e-12;         // stop when (#barrier terms)/s falls below this
};

Matrix evaluate_matrix_constraint(const LmiFeasibilityProblem& p, std::size_t k, const Vector& z);
Matrix evaluate_elementwise_constraint(const LmiFeasibilityProblem& p, std::size_t k,
                                       const Vector& z);

struct SolutionCheck {
  bool pass = false;
  std::vector<double> matrix_lambda_max;  // per matrix constraint
  std::vector<double> elementwise_min;    // per elementwise constraint
  double bound_violation = 0.0;           // max amount outside [lower, upper]
  double worst_violation = 0.0;           // max over all senses; <= 0 when satisfied
};

/// Evaluates every constraint at z. pass iff each matrix constraint has
/// lambda_max <= -margin + report_tol, each elementwise constraint has
/// min entry >= -slack - report_tol, and the bounds hold within report_tol.
SolutionCheck check_solution(const LmiFeasibilityProblem& p, const Vector& z,
                             double report_tol = 0.0);

LmiOutcome solve(const LmiFeasibilityProblem& p, const SolveOptions& opts = {});

}  // namespace posobs::lmi
