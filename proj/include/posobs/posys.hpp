#pragma once

// Positivity and stability analysis for continuous-time linear positive
// systems  x' = A x (+ B u),  y = C x.

#include "posobs/matcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace posobs {

inline constexpr double kPositivityTol = 1e-9;

/// Plant description. A must be Metzler; C and B are checked and reported.
class PositiveLinearSystem {
public:
  /// Validates dimensions and the Metzler property of A (within tol).
  PositiveLinearSystem(Matrix a, Matrix c, std::optional<Matrix> b = std::nullopt,
                       std::optional<Vector> equilibrium = std::nullopt, std::string label = {},
                       double tol = kPositivityTol);

  const Matrix& A() const { return a_; }
  const Matrix& C() const { return c_; }
  const std::optional<Matrix>& B() const { return b_; }
  const std::optional<Vector>& equilibrium() const { return equilibrium_; }
  const std::string& label() const { return label_; }

  int states() const { return static_cast<int>(a_.rows()); }
  int outputs() const { return static_cast<int>(c_.rows()); }
  int inputs() const { return b_ ? static_cast<int>(b_->cols()) : 0; }

  /// Problems found on construction that do not prevent use
  /// (negative C entries, negative B entries).
  const std::vector<std::string>& warnings() const { return warnings_; }

private:
  Matrix a_;
  Matrix c_;
  std::optional<Matrix> b_;
  std::optional<Vector> equilibrium_;
  std::string label_;
  std::vector<std::string> warnings_;
};

struct HurwitzCertificate {
  bool hurwitz = false;
  std::optional<Vector> witness;  // v > 0 with A^T v = -1
};

struct AnalysisReport {
  bool metzler = false;
  bool output_nonneg = false;
  std::optional<bool> input_nonneg;  // only when B is present
  bool hurwitz = false;
  double metzler_shift = 0.0;
  std::optional<Vector> positive_scaling_vector;
};

namespace posys {

bool is_nonnegative_matrix(const Matrix& m, double tol = kPositivityTol);

/// Off-diagonal entries >= -tol. The diagonal is unconstrained.
bool is_metzler(const Matrix& a, double tol = kPositivityTol);

/// Smallest s >= 0 with a + s*I elementwise nonnegative. Rejects non-Metzler a.
double metzler_shift(const Matrix& a, double tol = kPositivityTol);

/// Fills metzler / output_nonneg / input_nonneg only.
AnalysisReport check_positive_system(const PositiveLinearSystem& sys, double tol = kPositivityTol);

/// Linear-solve certificate for Metzler matrices: a is Hurwitz iff
/// a^T v = -1 has a solution v > 0. Singular a^T gives {false, none}.
HurwitzCertificate is_hurwitz_metzler(const Matrix& a, double tol = kPositivityTol);

/// Full report: positivity fields plus Hurwitz certificate and shift.
AnalysisReport analyze(const PositiveLinearSystem& sys, double tol = kPositivityTol);

/// Rank of the observability matrix [C; CA; ...; CA^(n-1)].
int observability_rank(const Matrix& a, const Matrix& c);

}  // namespace posys
}  // namespace posobs
