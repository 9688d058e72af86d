#include "posobs/etsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace posobs::etsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Loop {
  Matrix A, C, L;
  std::optional<Matrix> B, K;
  Vector offset;
  double beta = 0.0;
  Eigen::Index n = 0;

  Vector rhs(const Vector& X, const Vector& yk) const {
    const auto x = X.head(n);
    const auto xh = X.tail(n);
    const Vector h = x - offset;
    Vector dX(2 * n);
    dX.head(n) = A * h;
    dX.tail(n) = A * (xh - offset) + beta * (L * yk) - L * (C * xh);
    if (K) {
      const Vector bu = *B * (-(*K) * h);
      dX.head(n) += bu;
      dX.tail(n) += bu;
    }
    return dX;
  }

  Vector rk4(const Vector& X, double h, const Vector& yk) const {
    const Vector k1 = rhs(X, yk);
    const Vector k2 = rhs(X + 0.5 * h * k1, yk);
    const Vector k3 = rhs(X + 0.5 * h * k2, yk);
    const Vector k4 = rhs(X + h * k3, yk);
    return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

}  // namespace

bool trigger_violated(const Vector& eps, const Vector& y, const TriggerConfig& trig) {
  if (eps.size() != y.size()) throw InvalidInput("trigger_violated: length mismatch");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (eps(i) >= trig.threshold_coeff() * y(i)) return true;
  }
  return false;
}

double trigger_function(const Vector& eps, const Vector& y, const TriggerConfig& trig, bool guard) {
  if (eps.size() != y.size()) throw InvalidInput("trigger_function: length mismatch");
  double g = (eps - trig.threshold_coeff() * y).maxCoeff();
  if (guard) g = std::max(g, (-eps).maxCoeff());
  return g;
}

SimulationTrace simulate(const PositiveLinearSystem& sys, const ObserverDesign& design,
                         const TriggerConfig& trig, const SimulationConfig& cfg) {
  const Eigen::Index n = sys.A().rows();
  const Eigen::Index r = sys.C().rows();
  if (cfg.x0.size() != n) throw InvalidInput("simulate: x0 has wrong length");
  const Vector xhat0 = cfg.xhat0.size() == 0 ? Vector::Zero(n) : cfg.xhat0;
  if (xhat0.size() != n) throw InvalidInput("simulate: xhat0 has wrong length");
  if (!cfg.x0.allFinite() || !xhat0.allFinite()) throw InvalidInput("simulate: non-finite initial state");
  if (!(cfg.horizon > 0) || !std::isfinite(cfg.horizon)) throw InvalidInput("simulate: horizon must be > 0");
  if (!(cfg.step > 0) || !(cfg.step < cfg.horizon)) throw InvalidInput("simulate: need 0 < step < horizon");
  if (!(cfg.event_time_tol > 0) || cfg.event_time_tol > cfg.step) {
    throw InvalidInput("simulate: need 0 < event_time_tol <= step");
  }
  if (design.L.rows() != n || design.L.cols() != r) throw InvalidInput("simulate: L must be n x r");
  if (cfg.output_floor && !(*cfg.output_floor >= 0)) throw InvalidInput("simulate: output_floor must be >= 0");

  Loop loop;
  loop.A = sys.A();
  loop.C = sys.C();
  loop.L = design.L;
  loop.beta = trig.beta();
  loop.n = n;
  loop.offset = Vector::Zero(n);
  if (cfg.use_absolute_output) {
    if (!sys.equilibrium()) throw InvalidInput("simulate: absolute-output mode needs an equilibrium");
    loop.offset = *sys.equilibrium();
  }
  if (cfg.feedback_gain) {
    if (!sys.B()) throw InvalidInput("simulate: feedback gain given but the system has no B");
    if (cfg.feedback_gain->rows() != sys.B()->cols() || cfg.feedback_gain->cols() != n) {
      throw InvalidInput("simulate: feedback gain must be m x n");
    }
    loop.B = *sys.B();
    loop.K = *cfg.feedback_gain;
  }

  SimulationTrace tr;
  tr.horizon = cfg.horizon;
  tr.offset = loop.offset;

  Vector X(2 * n);
  X << cfg.x0, xhat0;
  Vector yk = loop.C * cfg.x0;

  auto suppressed = [&](const Vector& y) {
    return cfg.output_floor && (y.cwiseAbs().array() < *cfg.output_floor).all();
  };
  auto g_of = [&](const Vector& state, const Vector& held) {
    const Vector y = loop.C * state.head(n);
    if (suppressed(y)) return -kInf;
    return trigger_function(trig.beta() * held - y, y, trig, cfg.admissibility_guard);
  };
  auto record = [&](double t, const Vector& state, bool event) {
    const Vector x = state.head(n);
    const Vector xh = state.tail(n);
    const Vector y = loop.C * x;
    const Vector eps = trig.beta() * yk - y;
    tr.times.push_back(t);
    tr.x.push_back(x);
    tr.xhat.push_back(xh);
    tr.e.push_back(xh - x);
    tr.y.push_back(y);
    tr.yhat.push_back(loop.C * xh);
    tr.epsilon.push_back(eps);
    tr.is_event.push_back(event ? 1 : 0);
  };

  tr.events.push_back({0, 0.0, yk, g_of(X, yk), g_of(X, yk)});
  record(0.0, X, true);

  const auto steps = static_cast<long>(std::ceil(cfg.horizon / cfg.step - 1e-9));
  double t = 0.0;
  for (long j = 1; j <= steps; ++j) {
    const double target = j == steps ? cfg.horizon : static_cast<double>(j) * cfg.step;
    bool coincident_event = false;
    while (t < target) {
      const double h = target - t;
      const Vector Xn = loop.rk4(X, h, yk);
      if (!Xn.allFinite()) throw SimulationAborted("simulate: non-finite state", t + h);
      const double g0 = g_of(X, yk);
      const double g1 = g_of(Xn, yk);
      if (!(g0 < 0.0 && g1 >= 0.0)) {
        t = target;
        X = Xn;
        break;
      }
      // Bracket [lo, hi] with g(lo) < 0 <= g(hi).
      double lo = 0.0, hi = h, g_lo = g0, g_hi = g1;
      Vector X_hi = Xn;
      while (hi - lo > cfg.event_time_tol) {
        const double mid = 0.5 * (lo + hi);
        const Vector Xm = loop.rk4(X, mid, yk);
        const double gm = g_of(Xm, yk);
        if (gm >= 0.0) {
          hi = mid;
          g_hi = gm;
          X_hi = Xm;
        } else {
          lo = mid;
          g_lo = gm;
        }
      }
      X = X_hi;
      t = hi == h ? target : t + hi;
      yk = loop.C * X.head(n);
      tr.events.push_back({static_cast<int>(tr.events.size()), t, yk, g_hi, g_lo});
      coincident_event = t >= target;
      record(t, X, true);
    }
    if (!coincident_event) record(t, X, false);
  }

  tr.transmissions = static_cast<int>(tr.events.size());
  for (std::size_t k = 1; k < tr.events.size(); ++k) {
    tr.iets.push_back(tr.events[k].t - tr.events[k - 1].t);
  }
  tr.min_epsilon_seen = kInf;
  for (const auto& eps : tr.epsilon) tr.min_epsilon_seen = std::min(tr.min_epsilon_seen, eps.minCoeff());
  return tr;
}

double min_iet_bound(const Matrix& a, double alpha) {
  if (!(alpha > 0)) throw InvalidInput("min_iet_bound: alpha must be > 0");
  const double norm = matcore::spectral_norm(a);
  if (!(norm > 0)) throw InvalidInput("min_iet_bound: ||A|| must be > 0");
  return alpha / ((alpha + 1.0) * norm);
}

std::vector<std::pair<double, double>> iet_curve(const Matrix& a, const std::vector<double>& alphas) {
  std::vector<std::pair<double, double>> out;
  out.reserve(alphas.size());
  for (double al : alphas) out.emplace_back(al, min_iet_bound(a, al));
  return out;
}

ZenoReport zeno_report(const SimulationTrace& trace, const Matrix& a, double alpha,
                       double event_time_tol) {
  ZenoReport z;
  z.bound = min_iet_bound(a, alpha);
  z.min_observed_iet = trace.iets.empty() ? kInf : *std::min_element(trace.iets.begin(), trace.iets.end());
  z.satisfied = z.min_observed_iet >= z.bound - event_time_tol;
  return z;
}

LyapunovResult lyapunov_trace(const SimulationTrace& trace, const ObserverDesign& design) {
  LyapunovResult res;
  if (trace.x.empty()) {
    res.monotone = true;
    return res;
  }
  const auto n = trace.x.front().size();
  if (design.p.size() != n || design.q.size() != n) throw InvalidInput("lyapunov_trace: dimension mismatch");
  const Vector offset = trace.offset.size() == n ? trace.offset : Vector::Zero(n);
  res.values.reserve(trace.x.size());
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    const Vector h = trace.x[i] - offset;
    const Vector& e = trace.e[i];
    res.values.push_back(h.dot(design.p.asDiagonal() * h) + e.dot(design.q.asDiagonal() * e));
  }
  res.monotone = true;
  for (std::size_t i = 1; i < res.values.size(); ++i) {
    if (res.values[i] > res.values[i - 1] * (1.0 + 1e-8)) {
      res.monotone = false;
      break;
    }
  }
  return res;
}

PositivityAudit positivity_audit(const SimulationTrace& trace, double tol) {
  PositivityAudit a;
  auto min_of = [](const std::vector<Vector>& vs) {
    double m = kInf;
    for (const auto& v : vs) {
      if (v.size()) m = std::min(m, v.minCoeff());
    }
    return m;
  };
  a.x_min = min_of(trace.x);
  a.xhat_min = min_of(trace.xhat);
  a.e_min = min_of(trace.e);
  a.eps_min = min_of(trace.epsilon);
  a.x_nonneg = a.x_min >= -tol;
  a.xhat_nonneg = a.xhat_min >= -tol;
  a.e_nonneg = a.e_min >= -tol;
  a.eps_nonneg = a.eps_min >= -tol;
  return a;
}

SavingsReport savings_report(int event_count, double horizon, double periodic_interval) {
  if (!(periodic_interval > 0)) throw InvalidInput("savings_report: periodic interval must be > 0");
  SavingsReport s;
  s.event_count = event_count;
  s.periodic_count = static_cast<int>(std::floor(horizon / periodic_interval + 1e-9));
  s.savings_pct = s.periodic_count > 0 ? 100.0 * (1.0 - static_cast<double>(event_count) / s.periodic_count)
                                       : 0.0;
  return s;
}

SavingsReport savings_report(const SimulationTrace& trace, double periodic_interval) {
  return savings_report(trace.transmissions, trace.horizon, periodic_interval);
}

}  // namespace posobs::etsim
