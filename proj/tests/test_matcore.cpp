#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "posobs/matcore.hpp"

#include <limits>
#include <random>

using namespace posobs;
using namespace posobs::matcore;

TEST_CASE("make_matrix rejects ragged rows") {
  CHECK_THROWS_AS(make_matrix({{1.0, 2.0}, {3.0}}), InvalidInput);
  const Matrix m = make_matrix({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(m(1, 0) == 3.0);
}

TEST_CASE("mat_mul checks inner dimensions") {
  const Matrix a = make_matrix({{1.0, 2.0}});
  const Matrix b = make_matrix({{3.0}, {4.0}});
  CHECK(mat_mul(a, b)(0, 0) == doctest::Approx(11.0));
  CHECK_THROWS_AS(mat_mul(a, a), InvalidInput);
}

TEST_CASE("solve_linear") {
  const Matrix a = make_matrix({{4.0, 1.0}, {2.0, 3.0}});
  const Vector b = make_vector({1.0, 2.0});
  const Vector x = solve_linear(a, b);
  CHECK((a * x - b).norm() < 1e-14);

  CHECK_THROWS_AS(solve_linear(make_matrix({{1.0, 2.0}, {2.0, 4.0}}), b), SingularMatrix);
  CHECK_THROWS_AS(solve_linear(a, make_vector({1.0})), InvalidInput);
  CHECK_THROWS_AS(solve_linear(make_matrix({{1.0, std::numeric_limits<double>::quiet_NaN()}, {0.0, 1.0}}), b),
                  InvalidInput);
}

TEST_CASE("sym_eigen returns ascending eigenpairs") {
  const Matrix s = make_matrix({{2.0, 1.0}, {1.0, 2.0}});
  const auto eg = sym_eigen(s);
  CHECK(eg.values(0) == doctest::Approx(1.0));
  CHECK(eg.values(1) == doctest::Approx(3.0));
  CHECK((s * eg.vectors.col(1) - 3.0 * eg.vectors.col(1)).norm() < 1e-12);
  CHECK_THROWS_AS(sym_eigen(make_matrix({{1.0, 2.0}, {0.0, 1.0}})), InvalidInput);
}

TEST_CASE("max_eigenvalue agrees with the characteristic polynomial") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 6;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = u(rng);
    }
    const Matrix s = 0.5 * (m + m.transpose());
    CHECK(max_eigenvalue(s) == doctest::Approx(oracle::largest_real_root(s)).epsilon(1e-9));
  }
}

TEST_CASE("spectral_norm") {
  CHECK(spectral_norm(make_matrix({{-1.0, 3.0}, {0.0, -1.0}})) == doctest::Approx(3.3027756).epsilon(1e-7));
  CHECK(spectral_norm(make_matrix({{3.0, 0.0}, {0.0, -4.0}})) == doctest::Approx(4.0));
  const Matrix a = make_matrix({{1.0, 2.0}, {3.0, 4.0}});
  const double sq = std::sqrt(oracle::largest_real_root(a.transpose() * a));
  CHECK(spectral_norm(a) == doctest::Approx(sq).epsilon(1e-12));
}

TEST_CASE("is_negative_definite") {
  CHECK(is_negative_definite(make_matrix({{-1.0, 0.0}, {0.0, -2.0}})));
  CHECK_FALSE(is_negative_definite(make_matrix({{-1.0, 0.0}, {0.0, 1.0}})));
  CHECK(is_negative_definite(-Matrix::Identity(3, 3), 0.5));
  CHECK_FALSE(is_negative_definite(-Matrix::Identity(3, 3), 2.0));
  CHECK_FALSE(is_negative_definite(make_matrix({{-1.0, 0.0}, {0.0, -2.0}}), 1.5));
  CHECK_THROWS_AS(is_negative_definite(make_matrix({{-1.0}}), -1.0), InvalidInput);
}
