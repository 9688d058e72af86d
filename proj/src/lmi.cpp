#include "posobs/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace posobs::lmi {

std::string to_string(LmiStatus s) {
  switch (s) {
    case LmiStatus::Feasible: return "feasible";
    case LmiStatus::Infeasible: return "infeasible";
    case LmiStatus::Undetermined: return "undetermined";
  }
  return "unknown";
}

void LmiFeasibilityProblem::validate() const {
  if (dim < 0) throw InvalidInput("lmi: negative dimension");
  const auto d = static_cast<std::size_t>(dim);
  if (!variable_names.empty() && variable_names.size() != d) {
    throw InvalidInput("lmi: variable_names must be empty or have one name per variable");
  }
  if (lower_bounds.size() != dim || upper_bounds.size() != dim) {
    throw InvalidInput("lmi: bounds must have one entry per variable");
  }
  for (int i = 0; i < dim; ++i) {
    if (std::isnan(lower_bounds(i)) || std::isnan(upper_bounds(i)) ||
        lower_bounds(i) > upper_bounds(i)) {
      throw InvalidInput("lmi: inconsistent bounds for variable " + std::to_string(i));
    }
  }
  for (const auto& mc : matrix_constraints) {
    const std::string where = "lmi: matrix constraint '" + mc.name + "'";
    matcore::require_square(mc.constant, where);
    matcore::require_finite(mc.constant, where);
    matcore::symmetrize(mc.constant);
    if (mc.coefficients.size() != d) throw InvalidInput(where + ": wrong coefficient count");
    for (const auto& f : mc.coefficients) {
      if (f.rows() != mc.constant.rows() || f.cols() != mc.constant.cols()) {
        throw InvalidInput(where + ": coefficient size mismatch");
      }
      matcore::require_finite(f, where);
      matcore::symmetrize(f);
    }
    if (!(mc.margin >= 0)) throw InvalidInput(where + ": margin must be >= 0");
  }
  for (const auto& ec : elementwise_constraints) {
    const std::string where = "lmi: elementwise constraint '" + ec.name + "'";
    matcore::require_finite(ec.constant, where);
    if (ec.coefficients.size() != d) throw InvalidInput(where + ": wrong coefficient count");
    for (const auto& g : ec.coefficients) {
      if (g.rows() != ec.constant.rows() || g.cols() != ec.constant.cols()) {
        throw InvalidInput(where + ": coefficient size mismatch");
      }
      matcore::require_finite(g, where);
    }
    if (!(ec.slack >= 0)) throw InvalidInput(where + ": slack must be >= 0");
  }
}

namespace {

template <class Constraint>
Matrix affine_value(const Constraint& c, const Vector& z) {
  Matrix m = c.constant;
  for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
    const double zi = z(static_cast<Eigen::Index>(i));
    if (zi != 0.0) m += zi * c.coefficients[i];
  }
  return m;
}

// One scalar affine inequality  c + a.z >= -slack  taken from an elementwise constraint.
struct Row {
  Vector a;
  double c = 0.0;
  double slack = 0.0;
  std::string where;
};

std::vector<Row> flatten_rows(const LmiFeasibilityProblem& p) {
  std::vector<Row> rows;
  for (const auto& ec : p.elementwise_constraints) {
    for (Eigen::Index i = 0; i < ec.constant.rows(); ++i) {
      for (Eigen::Index j = 0; j < ec.constant.cols(); ++j) {
        Row r;
        r.a.resize(p.dim);
        for (int v = 0; v < p.dim; ++v) r.a(v) = ec.coefficients[static_cast<std::size_t>(v)](i, j);
        r.c = ec.constant(i, j);
        r.slack = ec.slack;
        r.where = ec.name + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

// Max of c + a.z over the box [lo, hi]; +inf when an unbounded direction helps.
double row_max(const Row& r, const Vector& lo, const Vector& hi, double* scale) {
  double m = r.c;
  double sc = std::abs(r.c);
  for (Eigen::Index i = 0; i < r.a.size(); ++i) {
    const double a = r.a(i);
    if (a == 0.0) continue;
    const double b = a > 0 ? hi(i) : lo(i);
    if (!std::isfinite(b)) return kInf;
    m += a * b;
    sc += std::abs(a * b);
  }
  if (scale) *scale = sc;
  return m;
}

struct Presolved {
  Vector lo, hi;
  std::vector<Row> rows;  // rows still needing the barrier
  bool infeasible = false;
  std::string detail;
};

Presolved presolve(const LmiFeasibilityProblem& p) {
  Presolved ps{p.lower_bounds, p.upper_bounds, flatten_rows(p), false, {}};
  auto is_fixed = [&](Eigen::Index i) { return ps.lo(i) == ps.hi(i); };

  bool changed = true;
  while (changed && !ps.infeasible) {
    changed = false;
    std::vector<Row> kept;
    for (auto& r : ps.rows) {
      bool touches_free = false;
      for (Eigen::Index i = 0; i < r.a.size(); ++i) {
        if (r.a(i) != 0.0 && !is_fixed(i)) touches_free = true;
      }
      double scale = 0.0;
      const double mx = row_max(r, ps.lo, ps.hi, &scale);
      if (mx < -r.slack) {
        ps.infeasible = true;
        ps.detail = "entry " + r.where + " cannot reach -slack anywhere in the bound box";
        return ps;
      }
      if (!touches_free) continue;  // constant and satisfied
      if (mx <= 1e-12 * scale) {
        // Forcing row: any feasible point sits at the maximizing corner.
        for (Eigen::Index i = 0; i < r.a.size(); ++i) {
          if (r.a(i) == 0.0 || is_fixed(i)) continue;
          const double b = r.a(i) > 0 ? ps.hi(i) : ps.lo(i);
          ps.lo(i) = b;
          ps.hi(i) = b;
        }
        changed = true;
        continue;
      }
      kept.push_back(std::move(r));
    }
    ps.rows = std::move(kept);
  }

  // A diagonal entry bounds lambda_max from below.
  for (const auto& mc : p.matrix_constraints) {
    for (Eigen::Index d = 0; d < mc.constant.rows(); ++d) {
      double mn = mc.constant(d, d);
      for (int i = 0; i < p.dim; ++i) {
        const double a = mc.coefficients[static_cast<std::size_t>(i)](d, d);
        if (a == 0.0) continue;
        const double b = a > 0 ? ps.lo(i) : ps.hi(i);
        if (!std::isfinite(b)) {
          mn = -kInf;
          break;
        }
        mn += a * b;
      }
      if (mn > -mc.margin) {
        ps.infeasible = true;
        std::ostringstream os;
        os << "diagonal entry " << d << " of '" << mc.name << "' is at least " << mn
           << " > -margin over the bound box";
        ps.detail = os.str();
        return ps;
      }
    }
  }
  return ps;
}

// Phase-1 problem restricted to the free variables, plus the epigraph variable t.
struct Barrier {
  struct Mat {
    Matrix c;
    std::vector<Matrix> a;
  };
  std::vector<Eigen::Index> free_idx;
  Vector z_full;  // fixed values in place; free entries overwritten on expand()
  std::vector<Mat> mats;
  std::vector<Row> rows;
  Vector lo, hi;

  Eigen::Index nfree() const { return static_cast<Eigen::Index>(free_idx.size()); }

  Vector expand(const Vector& zf) const {
    Vector z = z_full;
    for (Eigen::Index k = 0; k < nfree(); ++k) z(free_idx[static_cast<std::size_t>(k)]) = zf(k);
    return z;
  }

  double barrier_terms() const {
    double m = static_cast<double>(rows.size());
    for (const auto& mc : mats) m += static_cast<double>(mc.c.rows());
    for (Eigen::Index k = 0; k < nfree(); ++k) {
      if (std::isfinite(lo(k))) m += 1;
      if (std::isfinite(hi(k))) m += 1;
    }
    return m;
  }

  Matrix value(const Mat& mc, const Vector& zf) const {
    Matrix f = mc.c;
    for (Eigen::Index k = 0; k < nfree(); ++k) f += zf(k) * mc.a[static_cast<std::size_t>(k)];
    return f;
  }

  // Largest of lambda_max(F_k) and -g_j at zf: the smallest admissible t.
  double merit(const Vector& zf) const {
    double m = -kInf;
    for (const auto& mc : mats) m = std::max(m, matcore::max_eigenvalue(value(mc, zf)));
    for (const auto& r : rows) m = std::max(m, -(r.c + r.a.dot(zf)));
    return m;
  }

  // Objective s*t + barrier. Returns false outside the domain.
  bool eval(const Vector& x, double s, double& f, Vector* grad, Matrix* hess) const {
    const Eigen::Index n = nfree();
    const double t = x(n);
    const Vector zf = x.head(n);
    f = s * t;
    if (grad) {
      grad->setZero(n + 1);
      (*grad)(n) = s;
    }
    if (hess) hess->setZero(n + 1, n + 1);

    for (Eigen::Index k = 0; k < n; ++k) {
      const double dl = zf(k) - lo(k);
      const double du = hi(k) - zf(k);
      if (std::isfinite(lo(k))) {
        if (!(dl > 0)) return false;
        f -= std::log(dl);
        if (grad) (*grad)(k) -= 1.0 / dl;
        if (hess) (*hess)(k, k) += 1.0 / (dl * dl);
      }
      if (std::isfinite(hi(k))) {
        if (!(du > 0)) return false;
        f -= std::log(du);
        if (grad) (*grad)(k) += 1.0 / du;
        if (hess) (*hess)(k, k) += 1.0 / (du * du);
      }
    }

    for (const auto& r : rows) {
      const double v = r.c + r.a.dot(zf) + t;
      if (!(v > 0)) return false;
      f -= std::log(v);
      if (grad || hess) {
        Vector av(n + 1);
        av.head(n) = r.a;
        av(n) = 1.0;
        if (grad) *grad -= av / v;
        if (hess) *hess += av * av.transpose() / (v * v);
      }
    }

    for (const auto& mc : mats) {
      const Eigen::Index m = mc.c.rows();
      const Matrix slack = t * Matrix::Identity(m, m) - value(mc, zf);
      Eigen::LLT<Matrix> llt(slack);
      if (llt.info() != Eigen::Success) return false;
      const Matrix& lower = llt.matrixL();
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) logdet += 2.0 * std::log(lower(i, i));
      f -= logdet;
      if (!grad && !hess) continue;
      const Matrix inv = llt.solve(Matrix::Identity(m, m));
      std::vector<Matrix> g(static_cast<std::size_t>(n));
      for (Eigen::Index k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = inv * mc.a[static_cast<std::size_t>(k)];
      if (grad) {
        for (Eigen::Index k = 0; k < n; ++k) (*grad)(k) += g[static_cast<std::size_t>(k)].trace();
        (*grad)(n) -= inv.trace();
      }
      if (hess) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& gi = g[static_cast<std::size_t>(i)];
          for (Eigen::Index j = i; j < n; ++j) {
            // trace(gi * gj) without forming the product
            const double h = gi.cwiseProduct(g[static_cast<std::size_t>(j)].transpose()).sum();
            (*hess)(i, j) += h;
            if (j != i) (*hess)(j, i) += h;
          }
          const double ht = -gi.cwiseProduct(inv.transpose()).sum();
          (*hess)(i, n) += ht;
          (*hess)(n, i) += ht;
        }
        (*hess)(n, n) += inv.squaredNorm();
      }
    }
    return true;
  }
};

double initial_coordinate(double lo, double hi) {
  const bool flo = std::isfinite(lo);
  const bool fhi = std::isfinite(hi);
  if (flo && fhi) {
    const double width = hi - lo;
    const double c = std::clamp(1.0, lo, hi);
    if (c - lo > 1e-3 * width && hi - c > 1e-3 * width) return c;
    return lo + 0.5 * width;
  }
  if (flo) return std::max(1.0, lo + std::max(1.0, std::abs(lo)));
  if (fhi) return std::min(1.0, hi - std::max(1.0, std::abs(hi)));
  return 1.0;
}

}  // namespace

Matrix evaluate_matrix_constraint(const LmiFeasibilityProblem& p, std::size_t k, const Vector& z) {
  if (k >= p.matrix_constraints.size()) throw InvalidInput("lmi: matrix constraint index out of range");
  if (z.size() != p.dim) throw InvalidInput("lmi: decision vector has wrong length");
  return affine_value(p.matrix_constraints[k], z);
}

Matrix evaluate_elementwise_constraint(const LmiFeasibilityProblem& p, std::size_t k,
                                       const Vector& z) {
  if (k >= p.elementwise_constraints.size()) {
    throw InvalidInput("lmi: elementwise constraint index out of range");
  }
  if (z.size() != p.dim) throw InvalidInput("lmi: decision vector has wrong length");
  return affine_value(p.elementwise_constraints[k], z);
}

SolutionCheck check_solution(const LmiFeasibilityProblem& p, const Vector& z, double report_tol) {
  if (z.size() != p.dim) throw InvalidInput("lmi: decision vector has wrong length");
  SolutionCheck out;
  out.worst_violation = -kInf;
  for (std::size_t k = 0; k < p.matrix_constraints.size(); ++k) {
    const double lm = matcore::max_eigenvalue(affine_value(p.matrix_constraints[k], z));
    out.matrix_lambda_max.push_back(lm);
    out.worst_violation = std::max(out.worst_violation, lm + p.matrix_constraints[k].margin);
  }
  for (std::size_t k = 0; k < p.elementwise_constraints.size(); ++k) {
    const Matrix g = affine_value(p.elementwise_constraints[k], z);
    const double mn = g.size() ? g.minCoeff() : kInf;
    out.elementwise_min.push_back(mn);
    out.worst_violation = std::max(out.worst_violation, -p.elementwise_constraints[k].slack - mn);
  }
  for (int i = 0; i < p.dim; ++i) {
    out.bound_violation = std::max({out.bound_violation, p.lower_bounds(i) - z(i),
                                    z(i) - p.upper_bounds(i)});
  }
  out.worst_violation = std::max(out.worst_violation, out.bound_violation);
  if (!z.allFinite()) out.worst_violation = kInf;
  out.pass = out.worst_violation <= report_tol;
  return out;
}

LmiOutcome solve(const LmiFeasibilityProblem& p, const SolveOptions& opts) {
  p.validate();
  LmiOutcome out;

  Presolved ps = presolve(p);
  if (ps.infeasible) {
    out.status = LmiStatus::Infeasible;
    out.detail = ps.detail;
    out.z = Vector::Zero(p.dim);
    return out;
  }

  Barrier bar;
  bar.z_full.resize(p.dim);
  for (int i = 0; i < p.dim; ++i) {
    if (ps.lo(i) == ps.hi(i)) {
      bar.z_full(i) = ps.lo(i);
    } else {
      bar.free_idx.push_back(i);
      bar.z_full(i) = 0.0;
    }
  }
  const Eigen::Index n = bar.nfree();
  bar.lo.resize(n);
  bar.hi.resize(n);
  Vector zf(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = bar.free_idx[static_cast<std::size_t>(k)];
    bar.lo(k) = ps.lo(i);
    bar.hi(k) = ps.hi(i);
    zf(k) = initial_coordinate(ps.lo(i), ps.hi(i));
  }
  for (const auto& mc : p.matrix_constraints) {
    Barrier::Mat m;
    m.c = matcore::symmetrize(affine_value(mc, bar.z_full));
    bool any = false;
    for (Eigen::Index k = 0; k < n; ++k) {
      m.a.push_back(matcore::symmetrize(mc.coefficients[static_cast<std::size_t>(bar.free_idx[static_cast<std::size_t>(k)])]));
      any = any || m.a.back().cwiseAbs().maxCoeff() > 0.0;
    }
    if (any) bar.mats.push_back(std::move(m));
  }
  for (const auto& r : ps.rows) {
    Row rr;
    rr.c = r.c;
    rr.slack = r.slack;
    rr.where = r.where;
    rr.a.resize(n);
    for (int i = 0; i < p.dim; ++i) {
      if (ps.lo(i) == ps.hi(i)) rr.c += r.a(i) * ps.lo(i);
    }
    for (Eigen::Index k = 0; k < n; ++k) rr.a(k) = r.a(bar.free_idx[static_cast<std::size_t>(k)]);
    bar.rows.push_back(std::move(rr));
  }

  auto accept = [&](const Vector& z) {
    const SolutionCheck chk = check_solution(p, z, 0.0);
    out.z = z;
    out.worst_violation = chk.worst_violation;
    return chk.pass;
  };

  if (accept(bar.expand(zf))) {
    out.status = LmiStatus::Feasible;
    return out;
  }
  if (n == 0) {
    out.status = LmiStatus::Undetermined;
    out.detail = "every variable was fixed by presolve and the fixed point violates a constraint";
    return out;
  }

  const double m0 = bar.merit(zf);
  double scale = 1e-12;
  for (const auto& mc : bar.mats) scale = std::max(scale, mc.c.cwiseAbs().maxCoeff());
  for (const auto& mc : bar.mats) {
    for (const auto& a : mc.a) scale = std::max(scale, a.cwiseAbs().maxCoeff());
  }
  for (const auto& r : bar.rows) scale = std::max({scale, std::abs(r.c), r.a.cwiseAbs().maxCoeff()});
  const double gap0 = std::max(std::abs(m0), scale);

  Vector x(n + 1);
  x.head(n) = zf;
  x(n) = m0 + gap0;
  const double terms = bar.barrier_terms();
  double s = terms / gap0;

  int iters = 0;
  bool converged = false;
  while (iters < opts.max_iters && !converged) {
    while (iters < opts.max_iters) {
      double f = 0.0;
      Vector grad;
      Matrix hess;
      if (!bar.eval(x, s, f, &grad, &hess)) {
        out.detail = "iterate left the barrier domain";
        converged = true;
        break;
      }
      Eigen::LDLT<Matrix> ldlt(hess);
      Vector dx = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        const double reg = 1e-14 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        hess.diagonal().array() += reg;
        dx = hess.ldlt().solve(-grad);
      }
      const double dec = -grad.dot(dx);
      if (!(dec > 2.0 * opts.centering_tol)) break;

      double step = 1.0;
      double fnew = 0.0;
      Vector xnew;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        xnew = x + step * dx;
        if (bar.eval(xnew, s, fnew, nullptr, nullptr) && fnew <= f - 0.25 * step * dec) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      ++iters;
      if (!moved) break;
      x = xnew;
      if (accept(bar.expand(x.head(n)))) {
        out.status = LmiStatus::Feasible;
        out.iterations = iters;
        return out;
      }
    }
    if (terms / s < opts.gap_tol) {
      converged = true;
      if (out.detail.empty()) {
        std::ostringstream os;
        os << "barrier path converged with t = " << x(n)
           << " without reaching the required margin";
        out.detail = os.str();
      }
    }
    s *= opts.barrier_growth;
  }
  if (out.detail.empty()) out.detail = "iteration budget exhausted";
  out.status = LmiStatus::Undetermined;
  out.iterations = iters;
  accept(bar.expand(x.head(n)));
  return out;
}

}  // namespace posobs::lmi
