#pragma once

// Dense real matrix kernel shared by every other module. Sizes here are tiny
// (at most ~12), so everything is plain dynamic Eigen storage.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace posobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when an operation receives structurally invalid input
/// (dimension mismatch, non-square where square is required, NaN entries).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by solve_linear when the pivot falls below tolerance.
class SingularMatrix : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace matcore {

/// Builds a matrix from nested rows and rejects ragged or non-finite input.
Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);
Vector make_vector(std::initializer_list<double> values);

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const std::string& what);
void require_square(const Matrix& m, const std::string& what);

Matrix mat_mul(const Matrix& a, const Matrix& b);

/// Solves a*v = b with pivoting. Throws SingularMatrix when a is singular to
/// a relative pivot tolerance of 1e-13.
Vector solve_linear(const Matrix& a, const Vector& b);

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Eigen-decomposition of a symmetric matrix. The input is symmetrized as
/// (s + s^T)/2; relative asymmetry above 1e-9 is rejected as a bug upstream.
SymEigen sym_eigen(const Matrix& s);

/// Largest eigenvalue of a symmetric matrix (same symmetrization rules).
double max_eigenvalue(const Matrix& s);

/// Induced 2-norm, sqrt(lambda_max(a^T a)).
double spectral_norm(const Matrix& a);

/// True iff lambda_max(s) <= -margin.
bool is_negative_definite(const Matrix& s, double margin = 0.0);

Matrix symmetrize(const Matrix& s);

}  // namespace matcore
}  // namespace posobs
