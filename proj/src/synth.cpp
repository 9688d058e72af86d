#include "posobs/synth.hpp"

#include <algorithm>
#include <cmath>

namespace posobs {

TriggerConfig::TriggerConfig(double alpha, double beta)
    : alpha_(alpha), beta_(beta), threshold_(alpha * beta + beta - 1.0) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw InvalidInput("trigger: alpha must be > 0");
  if (!(beta > 1) || !std::isfinite(beta)) throw InvalidInput("trigger: beta must be > 1");
}

ObserverDesign ObserverDesign::from_gain(Vector p, Vector q, Matrix L, double lambda) {
  if (p.size() != q.size() || L.rows() != q.size()) {
    throw InvalidInput("design: P, Q and L dimensions disagree");
  }
  ObserverDesign d;
  d.W = q.asDiagonal() * L;
  d.L = std::move(L);
  d.p = std::move(p);
  d.q = std::move(q);
  d.lambda = lambda;
  return d;
}

namespace synth {

namespace {

void check_dims(const PositiveLinearSystem& sys, const Vector& p, const Vector& q, const Matrix& w) {
  const auto n = sys.A().rows();
  if (p.size() != n || q.size() != n || w.rows() != n || w.cols() != sys.C().rows()) {
    throw InvalidInput("design dimensions do not match the system");
  }
}

}  // namespace

Matrix observer_block(const Matrix& a, const Matrix& c, const TriggerConfig& trig,
                      const Vector& p, const Vector& q, const Matrix& w) {
  const auto n = a.rows();
  const Matrix P = p.asDiagonal();
  const Matrix Q = q.asDiagonal();
  const double k = trig.threshold_coeff();
  Matrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = P * a + a.transpose() * P;
  m.topRightCorner(n, n) = k * c.transpose() * w.transpose();
  m.bottomLeftCorner(n, n) = k * w * c;
  m.bottomRightCorner(n, n) = Q * a + a.transpose() * Q - w * c - c.transpose() * w.transpose();
  return m;
}

Matrix elementwise_condition(const Matrix& a, const Matrix& c, const Vector& q, const Matrix& w,
                             double lambda) {
  const Matrix Q = q.asDiagonal();
  return Q * a - w * c + lambda * Q;
}

lmi::LmiFeasibilityProblem build_observer_problem(const PositiveLinearSystem& sys,
                                                  const TriggerConfig& trig, double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidInput("observer problem: lambda must be > 0");
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();
  const auto n = a.rows();
  const auto r = c.rows();
  const double k = trig.threshold_coeff();
  const auto dim = static_cast<int>(2 * n + n * r);

  lmi::LmiFeasibilityProblem prob;
  prob.dim = dim;
  prob.lower_bounds.resize(dim);
  prob.upper_bounds.setConstant(dim, lmi::kDefaultUpper);

  lmi::MatrixConstraint block;
  block.name = "lyapunov_block";
  block.constant = Matrix::Zero(2 * n, 2 * n);

  lmi::ElementwiseConstraint elem;
  elem.name = "metzler_shift";
  elem.constant = Matrix::Zero(n, n);
  // W enters as W C; an exact zero lets presolve fix structurally forced gains.
  elem.slack = 0.0;

  for (Eigen::Index i = 0; i < n; ++i) {
    // p_i: E_ii A + A^T E_ii in the top-left block
    Matrix fp = Matrix::Zero(2 * n, 2 * n);
    fp.row(i).head(n) += a.row(i);
    fp.col(i).head(n) += a.row(i).transpose();
    block.coefficients.push_back(fp);
    elem.coefficients.push_back(Matrix::Zero(n, n));
    prob.variable_names.push_back("p" + std::to_string(i + 1));
    prob.lower_bounds(i) = lmi::kDefaultPositiveLower;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix fq = Matrix::Zero(2 * n, 2 * n);
    fq.block(n + i, n, 1, n) += a.row(i);
    fq.block(n, n + i, n, 1) += a.row(i).transpose();
    block.coefficients.push_back(fq);
    Matrix gq = Matrix::Zero(n, n);
    gq.row(i) = a.row(i);
    gq(i, i) += lambda;
    elem.coefficients.push_back(gq);
    prob.variable_names.push_back("q" + std::to_string(i + 1));
    prob.lower_bounds(n + i) = lmi::kDefaultPositiveLower;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      // W = e_i e_j^T:  W C = e_i c_j  (c_j = row j of C)
      Matrix wc = Matrix::Zero(n, n);
      wc.row(i) = c.row(j);
      Matrix fw = Matrix::Zero(2 * n, 2 * n);
      fw.topRightCorner(n, n) = k * wc.transpose();
      fw.bottomLeftCorner(n, n) = k * wc;
      fw.bottomRightCorner(n, n) = -wc - wc.transpose();
      block.coefficients.push_back(fw);
      elem.coefficients.push_back(-wc);
      prob.variable_names.push_back("w" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
      prob.lower_bounds(2 * n + i * r + j) = 0.0;
    }
  }
  prob.matrix_constraints.push_back(std::move(block));
  prob.elementwise_constraints.push_back(std::move(elem));
  return prob;
}

std::vector<double> default_lambda_grid(const Matrix& a, int points) {
  if (points < 2) throw InvalidInput("lambda grid needs at least two points");
  const double s = posys::metzler_shift(a);
  const double lo = 0.1 * (1.0 + s);
  const double hi = 50.0 * (1.0 + s);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    grid.push_back(lo * std::pow(hi / lo, f));
  }
  return grid;
}

SynthesisResult synthesize(const PositiveLinearSystem& sys, const TriggerConfig& trig,
                           const std::optional<std::vector<double>>& lambda_grid,
                           const lmi::SolveOptions& opts) {
  std::vector<double> grid = lambda_grid ? *lambda_grid : default_lambda_grid(sys.A());
  if (grid.empty()) throw InvalidInput("synthesize: empty lambda grid");
  std::sort(grid.begin(), grid.end());

  const auto n = sys.A().rows();
  const auto r = sys.C().rows();
  SynthesisResult res;
  for (double lambda : grid) {
    const auto prob = build_observer_problem(sys, trig, lambda);
    const auto outcome = lmi::solve(prob, opts);
    res.attempts.push_back(
        {lambda, outcome.status, outcome.iterations, outcome.worst_violation, outcome.detail});
    if (outcome.status != lmi::LmiStatus::Feasible) continue;

    const Vector& z = outcome.z;
    ObserverDesign d;
    d.p = z.segment(0, n);
    d.q = z.segment(n, n);
    d.W.resize(n, r);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) d.W(i, j) = z(2 * n + i * r + j);
    }
    // Both conditions are homogeneous in (P, Q, W); report the scale with max(p, q) = 1.
    const double scale = std::max(d.p.maxCoeff(), d.q.maxCoeff());
    d.p /= scale;
    d.q /= scale;
    d.W /= scale;
    d.L = d.q.cwiseInverse().asDiagonal() * d.W;
    d.lambda = lambda;
    d.lmi_margin = matcore::max_eigenvalue(observer_block(sys.A(), sys.C(), trig, d.p, d.q, d.W));
    d.elementwise_margin = elementwise_condition(sys.A(), sys.C(), d.q, d.W, lambda).minCoeff();
    res.design = std::move(d);
    return res;
  }
  throw SynthesisFailed("no feasible lambda on the grid", std::move(res.attempts));
}

DesignReport verify_design(const PositiveLinearSystem& sys, const TriggerConfig& trig,
                           const ObserverDesign& design, double margin, double tol) {
  check_dims(sys, design.p, design.q, design.W);
  if (design.L.rows() != design.W.rows() || design.L.cols() != design.W.cols()) {
    throw InvalidInput("design: L and W dimensions disagree");
  }
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();
  const auto n = a.rows();
  DesignReport rep;

  const Matrix alc = a - design.L * c;
  rep.metzler_ALC = posys::is_metzler(alc, tol);
  rep.L_nonneg = posys::is_nonnegative_matrix(design.L, tol);
  rep.p_q_positive = (design.p.array() > 0).all() && (design.q.array() > 0).all();

  rep.lmi_lambda_max = matcore::max_eigenvalue(observer_block(a, c, trig, design.p, design.q, design.W));
  rep.lmi_pass = rep.lmi_lambda_max < 0.0 && rep.lmi_lambda_max <= -margin;

  rep.elementwise_min = elementwise_condition(a, c, design.q, design.W, design.lambda).minCoeff();
  rep.elementwise_pass = rep.elementwise_min >= -tol;
  rep.alc_shifted_min = (alc + design.lambda * Matrix::Identity(n, n)).minCoeff();

  bool hurwitz = posys::is_metzler(a, tol) && posys::is_hurwitz_metzler(a, tol).hurwitz;
  hurwitz = hurwitz && rep.metzler_ALC && posys::is_hurwitz_metzler(alc, tol).hurwitz;
  rep.augmented_hurwitz = hurwitz;

  rep.observability_rank = posys::observability_rank(a, c);
  rep.observability_ok = rep.observability_rank == n;
  return rep;
}

}  // namespace synth
}  // namespace posobs
