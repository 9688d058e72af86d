#include "posobs/matcore.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace posobs::matcore {

namespace {

constexpr double kAsymmetryTol = 1e-9;
constexpr double kPivotTol = 1e-13;

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  const auto ncols = nrows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(nrows, ncols);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != ncols) {
      throw InvalidInput("make_matrix: ragged rows");
    }
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  require_finite(m, "make_matrix");
  return m;
}

Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  require_finite(v, "make_vector");
  return v;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw InvalidInput(what + ": non-finite entry");
}

void require_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) throw InvalidInput(what + ": expected square matrix, got " + dims(m));
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput("mat_mul: dimension mismatch " + dims(a) + " * " + dims(b));
  }
  return a * b;
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  require_square(a, "solve_linear");
  if (a.rows() != b.size()) throw InvalidInput("solve_linear: rhs length mismatch");
  require_finite(a, "solve_linear");
  require_finite(b, "solve_linear");
  if (a.rows() == 0) return Vector(0);

  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(kPivotTol);
  if (!lu.isInvertible()) {
    throw SingularMatrix("solve_linear: matrix is singular to pivot tolerance");
  }
  Vector v = lu.solve(b);
  // One step of iterative refinement keeps the residual at roundoff level.
  v += lu.solve(b - a * v);
  return v;
}

Matrix symmetrize(const Matrix& s) {
  require_square(s, "symmetrize");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kAsymmetryTol * scale) {
    throw InvalidInput("symmetrize: matrix is not symmetric");
  }
  return 0.5 * (s + s.transpose());
}

SymEigen sym_eigen(const Matrix& s) {
  require_square(s, "sym_eigen");
  require_finite(s, "sym_eigen");
  if (s.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sym_eigen: eigensolver failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double max_eigenvalue(const Matrix& s) {
  require_square(s, "max_eigenvalue");
  if (s.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("max_eigenvalue: eigensolver failed to converge");
  }
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double spectral_norm(const Matrix& a) {
  require_finite(a, "spectral_norm");
  if (a.size() == 0) return 0.0;
  // Singular values avoid squaring the condition number of a^T a.
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

bool is_negative_definite(const Matrix& s, double margin) {
  if (margin < 0) throw InvalidInput("is_negative_definite: margin must be >= 0");
  return max_eigenvalue(s) <= -margin;
}

}  // namespace posobs::matcore
