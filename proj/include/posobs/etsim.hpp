#pragma once

// Plant / observer loop under event-based output transmission.
//
//   plant     x'    = A h + B u,              h = x - x_eq, u = -K h (optional)
//   observer  xhat' = A (xhat - x_eq) + B u + beta L y(t_k) - L C xhat
//   sampling  eps   = beta y(t_k) - y,        event when eps_i >= c y_i for some i
//
// x_eq is zero unless absolute-output mode is on, in which case states and
// outputs are absolute levels and x_eq is the system equilibrium. Either way
// e = xhat - x obeys e' = (A - LC) e + L eps.

#include "posobs/synth.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace posobs {

struct SimulationConfig {
  Vector x0;
  Vector xhat0;  // zero vector when left empty
  double horizon = 0.0;
  double step = 1e-3;
  double event_time_tol = 1e-10;
  std::optional<Matrix> feedback_gain;  // m x n, u = -K h
  bool use_absolute_output = false;
  std::optional<double> output_floor;
  // Also transmit when some eps_i reaches zero, so that eps >= 0 holds on
  // every inter-event interval. Off gives the pure threshold law.
  bool admissibility_guard = true;
};

struct EventRecord {
  int k = 0;
  double t = 0.0;
  Vector y;                // transmitted output y(t_k)
  double g_after = 0.0;    // trigger function at t_k (>= 0 except k = 0)
  double g_before = 0.0;   // trigger function at t_k - bracket width (< 0)
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<Vector> x, xhat, e, y, yhat, epsilon;
  std::vector<char> is_event;
  std::vector<EventRecord> events;
  std::vector<double> iets;
  std::optional<std::vector<double>> lyapunov;
  int transmissions = 0;
  double min_epsilon_seen = 0.0;
  double horizon = 0.0;
  Vector offset;  // x_eq used for h = x - x_eq
};

struct ZenoReport {
  double bound = 0.0;
  double min_observed_iet = 0.0;  // +inf with fewer than two events
  bool satisfied = false;
};

struct PositivityAudit {
  bool x_nonneg = false, xhat_nonneg = false, e_nonneg = false, eps_nonneg = false;
  double x_min = 0.0, xhat_min = 0.0, e_min = 0.0, eps_min = 0.0;
  bool all() const { return x_nonneg && xhat_nonneg && e_nonneg && eps_nonneg; }
};

struct SavingsReport {
  int event_count = 0;
  int periodic_count = 0;
  double savings_pct = 0.0;
};

struct LyapunovResult {
  std::vector<double> values;
  bool monotone = false;
};

class SimulationAborted : public std::runtime_error {
public:
  SimulationAborted(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

private:
  double time_;
};

namespace etsim {

/// Any i with eps_i >= threshold_coeff * y_i (closed condition).
bool trigger_violated(const Vector& eps, const Vector& y, const TriggerConfig& trig);

/// max_i(eps_i - c y_i), and max(., max_i(-eps_i)) with the guard on.
double trigger_function(const Vector& eps, const Vector& y, const TriggerConfig& trig, bool guard);

SimulationTrace simulate(const PositiveLinearSystem& sys, const ObserverDesign& design,
                         const TriggerConfig& trig, const SimulationConfig& cfg);

/// alpha / ((alpha + 1) * ||A||_2)
double min_iet_bound(const Matrix& a, double alpha);

std::vector<std::pair<double, double>> iet_curve(const Matrix& a, const std::vector<double>& alphas);

ZenoReport zeno_report(const SimulationTrace& trace, const Matrix& a, double alpha,
                       double event_time_tol);

/// V = h^T P h + e^T Q e; monotone iff V never grows by more than 1e-8 relative.
LyapunovResult lyapunov_trace(const SimulationTrace& trace, const ObserverDesign& design);

PositivityAudit positivity_audit(const SimulationTrace& trace, double tol = kPositivityTol);

SavingsReport savings_report(const SimulationTrace& trace, double periodic_interval);
SavingsReport savings_report(int event_count, double horizon, double periodic_interval);

}  // namespace etsim
}  // namespace posobs
