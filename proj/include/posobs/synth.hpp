#pragma once

// Event-based positive observer synthesis. For fixed trigger parameters
// (alpha, beta) and a scalar lambda, the design conditions are affine in the
// diagonals of P, Q and in W:
//
//   [ PA + A^T P              c C^T W^T             ]
//   [ c W C                   QA + A^T Q - WC - C^T W^T ]  < 0,   c = alpha*beta + beta - 1
//
//   QA - WC + lambda Q >= 0 (elementwise),   W >= 0,
//
// with observer gain L = Q^{-1} W. Lambda is swept on a grid.

#include "posobs/lmi.hpp"
#include "posobs/posys.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace posobs {

/// Event-law scalars. threshold_coeff() = alpha*beta + beta - 1.
class TriggerConfig {
public:
  TriggerConfig(double alpha, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double threshold_coeff() const { return threshold_; }

private:
  double alpha_;
  double beta_;
  double threshold_;
};

struct ObserverDesign {
  Matrix L;  // n x r
  Vector p;  // diag(P)
  Vector q;  // diag(Q)
  Matrix W;  // n x r, W = Q L
  double lambda = 0.0;
  double lmi_margin = 0.0;          // lambda_max of the block matrix
  double elementwise_margin = 0.0;  // min entry of QA - WC + lambda Q

  /// Builds a design from given (P, Q, L, lambda) values; W = Q L and the
  /// margins are left at zero until verify_design fills a report.
  static ObserverDesign from_gain(Vector p, Vector q, Matrix L, double lambda);
};

struct DesignReport {
  bool metzler_ALC = false;
  bool L_nonneg = false;
  bool lmi_pass = false;
  bool elementwise_pass = false;
  bool augmented_hurwitz = false;
  bool observability_ok = false;
  bool p_q_positive = false;
  double lmi_lambda_max = 0.0;
  double elementwise_min = 0.0;
  double alc_shifted_min = 0.0;  // min entry of (A - LC) + lambda I
  int observability_rank = 0;

  /// Everything except the observability diagnostic.
  bool all_pass() const {
    return metzler_ALC && L_nonneg && lmi_pass && elementwise_pass && augmented_hurwitz &&
           p_q_positive;
  }
};

struct LambdaAttempt {
  double lambda = 0.0;
  lmi::LmiStatus status = lmi::LmiStatus::Undetermined;
  int iterations = 0;
  double worst_violation = 0.0;
  std::string detail;
};

class SynthesisFailed : public std::runtime_error {
public:
  SynthesisFailed(const std::string& what, std::vector<LambdaAttempt> attempts)
      : std::runtime_error(what), attempts_(std::move(attempts)) {}
  const std::vector<LambdaAttempt>& attempts() const { return attempts_; }

private:
  std::vector<LambdaAttempt> attempts_;
};

namespace synth {

/// Decision vector layout: (p_1..p_n, q_1..q_n, w_11, w_12, .., w_nr) row-major.
lmi::LmiFeasibilityProblem build_observer_problem(const PositiveLinearSystem& sys,
                                                  const TriggerConfig& trig, double lambda);

/// The block matrix and elementwise matrix evaluated at given P, Q, W.
Matrix observer_block(const Matrix& a, const Matrix& c, const TriggerConfig& trig,
                      const Vector& p, const Vector& q, const Matrix& w);
Matrix elementwise_condition(const Matrix& a, const Matrix& c, const Vector& q, const Matrix& w,
                             double lambda);

/// 50 log-spaced points in [0.1 (1 + s), 50 (1 + s)], s = metzler_shift(A).
std::vector<double> default_lambda_grid(const Matrix& a, int points = 50);

struct SynthesisResult {
  ObserverDesign design;
  std::vector<LambdaAttempt> attempts;  // every lambda tried, in grid order
};

/// Smallest grid lambda whose problem solves Feasible. Throws SynthesisFailed
/// carrying per-lambda diagnostics otherwise.
SynthesisResult synthesize(const PositiveLinearSystem& sys, const TriggerConfig& trig,
                           const std::optional<std::vector<double>>& lambda_grid = std::nullopt,
                           const lmi::SolveOptions& opts = {});

/// Report-only check of all positivity and stability conditions.
/// lmi_pass requires lambda_max(block) < -margin.
DesignReport verify_design(const PositiveLinearSystem& sys, const TriggerConfig& trig,
                           const ObserverDesign& design, double margin = 0.0,
                           double tol = kPositivityTol);

}  // namespace synth
}  // namespace posobs
