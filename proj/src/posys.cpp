#include "posobs/posys.hpp"

#include <algorithm>
#include <utility>

namespace posobs {

PositiveLinearSystem::PositiveLinearSystem(Matrix a, Matrix c, std::optional<Matrix> b,
                                           std::optional<Vector> equilibrium, std::string label,
                                           double tol)
    : a_(std::move(a)),
      c_(std::move(c)),
      b_(std::move(b)),
      equilibrium_(std::move(equilibrium)),
      label_(std::move(label)) {
  matcore::require_square(a_, "PositiveLinearSystem: A");
  matcore::require_finite(a_, "PositiveLinearSystem: A");
  matcore::require_finite(c_, "PositiveLinearSystem: C");
  const auto n = a_.rows();
  if (n == 0) throw InvalidInput("PositiveLinearSystem: empty state matrix");
  if (c_.cols() != n || c_.rows() == 0) {
    throw InvalidInput("PositiveLinearSystem: C must have " + std::to_string(n) + " columns");
  }
  if (b_) {
    matcore::require_finite(*b_, "PositiveLinearSystem: B");
    if (b_->rows() != n || b_->cols() == 0) {
      throw InvalidInput("PositiveLinearSystem: B must have " + std::to_string(n) + " rows");
    }
    if (!posys::is_nonnegative_matrix(*b_, tol)) warnings_.emplace_back("B has negative entries");
  }
  if (equilibrium_) {
    matcore::require_finite(*equilibrium_, "PositiveLinearSystem: equilibrium");
    if (equilibrium_->size() != n) {
      throw InvalidInput("PositiveLinearSystem: equilibrium must have length " + std::to_string(n));
    }
  }
  if (!posys::is_metzler(a_, tol)) throw InvalidInput("PositiveLinearSystem: A is not Metzler");
  if (!posys::is_nonnegative_matrix(c_, tol)) warnings_.emplace_back("C has negative entries");
}

namespace posys {

bool is_nonnegative_matrix(const Matrix& m, double tol) {
  if (tol < 0) throw InvalidInput("is_nonnegative_matrix: tol must be >= 0");
  return m.size() == 0 || m.minCoeff() >= -tol;
}

bool is_metzler(const Matrix& a, double tol) {
  matcore::require_square(a, "is_metzler");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) < -tol) return false;
    }
  }
  return true;
}

double metzler_shift(const Matrix& a, double tol) {
  if (!is_metzler(a, tol)) throw InvalidInput("metzler_shift: matrix is not Metzler");
  if (a.rows() == 0) return 0.0;
  return std::max(0.0, -a.diagonal().minCoeff());
}

AnalysisReport check_positive_system(const PositiveLinearSystem& sys, double tol) {
  AnalysisReport r;
  r.metzler = is_metzler(sys.A(), tol);
  r.output_nonneg = is_nonnegative_matrix(sys.C(), tol);
  if (sys.B()) r.input_nonneg = is_nonnegative_matrix(*sys.B(), tol);
  return r;
}

HurwitzCertificate is_hurwitz_metzler(const Matrix& a, double tol) {
  if (!is_metzler(a, tol)) throw InvalidInput("is_hurwitz_metzler: matrix is not Metzler");
  const auto n = a.rows();
  Vector v;
  try {
    v = matcore::solve_linear(a.transpose(), Vector::Constant(n, -1.0));
  } catch (const SingularMatrix&) {
    return {};
  }
  if ((v.array() > 0.0).all()) return {true, v};
  return {};
}

AnalysisReport analyze(const PositiveLinearSystem& sys, double tol) {
  AnalysisReport r = check_positive_system(sys, tol);
  if (r.metzler) {
    r.metzler_shift = metzler_shift(sys.A(), tol);
    auto cert = is_hurwitz_metzler(sys.A(), tol);
    r.hurwitz = cert.hurwitz;
    r.positive_scaling_vector = std::move(cert.witness);
  }
  return r;
}

int observability_rank(const Matrix& a, const Matrix& c) {
  matcore::require_square(a, "observability_rank");
  if (c.cols() != a.rows()) throw InvalidInput("observability_rank: C/A dimension mismatch");
  const auto n = a.rows();
  const auto r = c.rows();
  Matrix obs(n * r, n);
  Matrix block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * r, r) = block;
    block = block * a;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(obs);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

}  // namespace posys
}  // namespace posobs
