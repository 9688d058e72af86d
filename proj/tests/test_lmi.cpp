#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "posobs/lmi.hpp"
#include "posobs/models.hpp"
#include "posobs/synth.hpp"

#include <random>

using namespace posobs;
using namespace posobs::lmi;
using matcore::make_matrix;
using matcore::make_vector;

namespace {

LmiFeasibilityProblem scalar_problem(double constant, double lo, double hi) {
  LmiFeasibilityProblem p;
  p.dim = 1;
  p.matrix_constraints.push_back({"f", make_matrix({{constant}}), {make_matrix({{1.0}})}, kDefaultMargin});
  p.lower_bounds = Vector::Constant(1, lo);
  p.upper_bounds = Vector::Constant(1, hi);
  return p;
}

Matrix random_symmetric(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return 0.5 * (m + m.transpose());
}

// A problem built around a known strictly feasible point.
LmiFeasibilityProblem planted_problem(std::mt19937& rng, int dim, int block, bool elementwise) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.1, 1.0);
  Vector zstar(dim);
  for (int i = 0; i < dim; ++i) zstar(i) = u(rng);

  LmiFeasibilityProblem p;
  p.dim = dim;
  p.lower_bounds = Vector::Constant(dim, -5.0);
  p.upper_bounds = Vector::Constant(dim, 5.0);
  MatrixConstraint mc;
  mc.name = "planted";
  Matrix at_star = Matrix::Zero(block, block);
  for (int i = 0; i < dim; ++i) {
    mc.coefficients.push_back(random_symmetric(rng, block));
    at_star += zstar(i) * mc.coefficients.back();
  }
  const Matrix r = random_symmetric(rng, block);
  mc.constant = -at_star - r * r - 0.5 * Matrix::Identity(block, block);
  p.matrix_constraints.push_back(mc);

  if (elementwise) {
    ElementwiseConstraint ec;
    ec.name = "planted_entries";
    Matrix g_star = Matrix::Zero(2, 3);
    for (int i = 0; i < dim; ++i) {
      ec.coefficients.push_back(Matrix::NullaryExpr(2, 3, [&] { return u(rng); }));
      g_star += zstar(i) * ec.coefficients.back();
    }
    ec.constant = -g_star + Matrix::NullaryExpr(2, 3, [&] { return pos(rng); });
    p.elementwise_constraints.push_back(ec);
  }
  return p;
}

// Diagonal Lyapunov inequality A^T P + P A < 0 with P = diag(z) > 0.
LmiFeasibilityProblem diagonal_lyapunov(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  LmiFeasibilityProblem p;
  p.dim = n;
  MatrixConstraint mc{"lyapunov", Matrix::Zero(n, n), {}, kDefaultMargin};
  for (int i = 0; i < n; ++i) {
    Matrix e = Matrix::Zero(n, n);
    e(i, i) = 1.0;
    mc.coefficients.push_back(a.transpose() * e + e * a);
  }
  p.matrix_constraints.push_back(mc);
  p.lower_bounds = Vector::Constant(n, kDefaultPositiveLower);
  p.upper_bounds = Vector::Constant(n, kDefaultUpper);
  return p;
}

// Full symmetric P: A^T P + P A < 0 and -P < 0.
LmiFeasibilityProblem full_lyapunov(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  LmiFeasibilityProblem p;
  MatrixConstraint lyap{"lyapunov", Matrix::Zero(n, n), {}, kDefaultMargin};
  MatrixConstraint posdef{"p_posdef", Matrix::Zero(n, n), {}, kDefaultMargin};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      lyap.coefficients.push_back(a.transpose() * e + e * a);
      posdef.coefficients.push_back(-e);
    }
  }
  p.dim = static_cast<int>(lyap.coefficients.size());
  p.matrix_constraints = {lyap, posdef};
  p.lower_bounds = Vector::Constant(p.dim, -100.0);
  p.upper_bounds = Vector::Constant(p.dim, 100.0);
  return p;
}

Matrix random_hurwitz_metzler(std::mt19937& rng, int n) {
  for (;;) {
    const Matrix a = oracle::random_metzler(rng, n);
    if (oracle::largest_real_root(a) < -0.05) return a;
  }
}

}  // namespace

TEST_CASE("evaluate_matrix_constraint") {
  auto p = scalar_problem(0.0, -10.0, 10.0);
  CHECK(evaluate_matrix_constraint(p, 0, make_vector({-2.0}))(0, 0) == -2.0);
  CHECK(evaluate_matrix_constraint(p, 0, make_vector({0.0}))(0, 0) == 0.0);
  CHECK_THROWS_AS(evaluate_matrix_constraint(p, 0, make_vector({1.0, 2.0})), InvalidInput);
  CHECK_THROWS_AS(evaluate_matrix_constraint(p, 3, make_vector({1.0})), InvalidInput);
}

TEST_CASE("scalar problems") {
  const auto feasible = solve(scalar_problem(0.0, -10.0, 10.0));
  REQUIRE(feasible.status == LmiStatus::Feasible);
  CHECK(feasible.z(0) < 0.0);

  // [z] < -I with z >= 0 cannot hold.
  auto p = scalar_problem(1.0, 0.0, kInf);
  const auto infeasible = solve(p);
  CHECK(infeasible.status == LmiStatus::Infeasible);
  CHECK_FALSE(infeasible.detail.empty());
  CHECK_FALSE(check_solution(p, make_vector({0.0})).pass);
}

TEST_CASE("malformed problems are rejected") {
  auto p = scalar_problem(0.0, -1.0, 1.0);
  p.lower_bounds = make_vector({2.0});
  CHECK_THROWS_AS(solve(p), InvalidInput);
  p = scalar_problem(0.0, -1.0, 1.0);
  p.matrix_constraints[0].coefficients.push_back(make_matrix({{1.0}}));
  CHECK_THROWS_AS(solve(p), InvalidInput);
  p = scalar_problem(0.0, -1.0, 1.0);
  p.matrix_constraints[0].constant = make_matrix({{0.0, 1.0}, {0.0, 0.0}});
  p.matrix_constraints[0].coefficients[0] = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(solve(p), InvalidInput);
}

TEST_CASE("reference example1 point passes the observer conditions") {
  const auto sys = models::example1();
  const TriggerConfig trig(0.3, 1.5);
  const auto prob = synth::build_observer_problem(sys, trig, 2.6341);
  Vector z(6);
  z << 0.3655, 1.1736, 0.4056, 0.9079, 0.4056 * 0.9037, 0.0;
  const auto chk = check_solution(prob, z);
  CHECK(chk.pass);
  REQUIRE(chk.matrix_lambda_max.size() == 1);
  CHECK(chk.matrix_lambda_max[0] < 0.0);
  REQUIRE(chk.elementwise_min.size() == 1);
  CHECK(chk.elementwise_min[0] == 0.0);  // entry (2,1) is identically zero
  const Matrix el = evaluate_elementwise_constraint(prob, 0, z);
  CHECK(el(0, 0) == doctest::Approx(-0.4056 - 0.36654 + 2.6341 * 0.4056).epsilon(1e-3));

  const auto out = solve(prob);
  REQUIRE(out.status == LmiStatus::Feasible);
  CHECK(check_solution(prob, out.z).pass);
}

TEST_CASE("soundness on random planted problems") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prob = planted_problem(rng, 2 + trial % 6, 2 + trial % 4, trial % 2 == 0);
    const auto out = solve(prob);
    CAPTURE(trial);
    CHECK(out.status == LmiStatus::Feasible);
    if (out.status == LmiStatus::Feasible) CHECK(check_solution(prob, out.z).pass);
  }
}

TEST_CASE("curated feasible suite") {
  std::mt19937 rng(5);
  std::vector<LmiFeasibilityProblem> suite;
  for (int n = 2; n <= 6; ++n) {
    suite.push_back(diagonal_lyapunov(random_hurwitz_metzler(rng, n)));
    suite.push_back(diagonal_lyapunov(random_hurwitz_metzler(rng, n)));
  }
  for (int n = 2; n <= 4; ++n) {
    suite.push_back(full_lyapunov(random_hurwitz_metzler(rng, n)));
    Matrix a = oracle::random_metzler(rng, n) - 8.0 * Matrix::Identity(n, n);
    a(0, n - 1) -= 1.0;
    suite.push_back(full_lyapunov(a));
  }
  const auto sys = models::example1();
  for (double alpha : {0.3, 0.5, 0.9, 1.0}) {
    suite.push_back(synth::build_observer_problem(sys, TriggerConfig(alpha, 1.5), 3.0));
  }
  REQUIRE(suite.size() == 20);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CAPTURE(i);
    CHECK(suite[i].dim <= 12);
    const auto out = solve(suite[i]);
    CHECK(out.status == LmiStatus::Feasible);
    CHECK(check_solution(suite[i], out.z).pass);
  }
}

TEST_CASE("solve is deterministic") {
  std::mt19937 rng(3);
  const auto prob = planted_problem(rng, 5, 4, true);
  const auto a = solve(prob);
  const auto b = solve(prob);
  CHECK(a.status == b.status);
  CHECK(a.iterations == b.iterations);
  CHECK(a.z == b.z);
}

TEST_CASE("an unsatisfiable Lyapunov problem is never reported feasible") {
  // Unstable Metzler matrix: no diagonal P > 0 gives A^T P + P A < 0.
  const auto prob = diagonal_lyapunov(make_matrix({{0.5, 1.0}, {0.0, -1.0}}));
  SolveOptions opts;
  opts.max_iters = 2000;
  const auto out = solve(prob, opts);
  CHECK(out.status != LmiStatus::Feasible);
}
