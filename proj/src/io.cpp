#include "posobs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace posobs::io {

namespace {

const json& require(const json& j, const std::string& field) {
  if (!j.is_object()) throw ParseError("expected a JSON object while looking for '" + field + "'");
  auto it = j.find(field);
  if (it == j.end()) throw ParseError("missing field '" + field + "'");
  return *it;
}

double number(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_number()) throw ParseError("field '" + field + "' must be a number");
  return v.get<double>();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double length_factor(const std::string& unit, const std::string& field) {
  if (unit == "m") return 1.0;
  if (unit == "cm") return 1e-2;
  if (unit == "mm") return 1e-3;
  throw ParseError("units." + field + ": unknown length unit '" + unit + "'");
}

double flow_factor(const std::string& unit) {
  if (unit == "m^3/s") return 1.0;
  if (unit == "cm^3/s") return 1e-6;
  if (unit == "l/s") return 1e-3;
  throw ParseError("units.flow: unknown flow unit '" + unit + "'");
}

std::string unit_field(const json& units, const std::string& field) {
  const json& v = require(units, field);
  if (!v.is_string()) throw ParseError("units." + field + " must be a string");
  return v.get<std::string>();
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError("field '" + field + "' must be a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw ParseError("field '" + field + "' must be a non-empty array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError("field '" + field + "' row " + std::to_string(i) + " is not rectangular");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        throw ParseError("field '" + field + "' entry (" + std::to_string(i) + "," + std::to_string(k) +
                         ") is not a number");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("field '" + field + "' must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError("field '" + field + "' entry " + std::to_string(i) + " is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json system_to_json(const PositiveLinearSystem& sys) {
  json j;
  j["label"] = sys.label();
  j["A"] = matrix_to_json(sys.A());
  if (sys.B()) j["B"] = matrix_to_json(*sys.B());
  j["C"] = matrix_to_json(sys.C());
  if (sys.equilibrium()) j["equilibrium"] = vector_to_json(*sys.equilibrium());
  return j;
}

PositiveLinearSystem system_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("system file must be a JSON object");
  const std::string label = j.value("label", std::string{});
  Matrix a = matrix_from_json(require(j, "A"), "A");
  Matrix c = matrix_from_json(require(j, "C"), "C");
  std::optional<Matrix> b;
  if (j.contains("B") && !j["B"].is_null()) b = matrix_from_json(j["B"], "B");
  std::optional<Vector> eq;
  if (j.contains("equilibrium") && !j["equilibrium"].is_null()) {
    eq = vector_from_json(j["equilibrium"], "equilibrium");
  }
  try {
    return PositiveLinearSystem(std::move(a), std::move(c), std::move(b), std::move(eq), label);
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
}

json design_to_json(const ObserverDesign& d) {
  json j;
  j["L"] = matrix_to_json(d.L);
  j["P_diag"] = vector_to_json(d.p);
  j["Q_diag"] = vector_to_json(d.q);
  j["W"] = matrix_to_json(d.W);
  j["lambda"] = d.lambda;
  j["lmi_margin"] = d.lmi_margin;
  j["elementwise_margin"] = d.elementwise_margin;
  return j;
}

ObserverDesign design_from_json(const json& j) {
  ObserverDesign d;
  d.L = matrix_from_json(require(j, "L"), "L");
  d.p = vector_from_json(require(j, "P_diag"), "P_diag");
  d.q = vector_from_json(require(j, "Q_diag"), "Q_diag");
  d.lambda = number(j, "lambda");
  if (d.p.size() != d.q.size() || d.L.rows() != d.q.size()) {
    throw ParseError("design: P_diag, Q_diag and L row counts disagree");
  }
  d.W = j.contains("W") ? matrix_from_json(j["W"], "W") : Matrix(d.q.asDiagonal() * d.L);
  if (d.W.rows() != d.L.rows() || d.W.cols() != d.L.cols()) throw ParseError("design: W and L shapes differ");
  d.lmi_margin = j.value("lmi_margin", 0.0);
  d.elementwise_margin = j.value("elementwise_margin", 0.0);
  return d;
}

json report_to_json(const AnalysisReport& r) {
  json j;
  j["metzler"] = r.metzler;
  j["output_nonneg"] = r.output_nonneg;
  j["input_nonneg"] = r.input_nonneg ? json(*r.input_nonneg) : json(nullptr);
  j["hurwitz"] = r.hurwitz;
  j["metzler_shift"] = r.metzler_shift;
  j["positive_scaling_vector"] =
      r.positive_scaling_vector ? vector_to_json(*r.positive_scaling_vector) : json(nullptr);
  return j;
}

json report_to_json(const DesignReport& r) {
  json j;
  j["metzler_ALC"] = r.metzler_ALC;
  j["L_nonneg"] = r.L_nonneg;
  j["lmi_pass"] = r.lmi_pass;
  j["elementwise_pass"] = r.elementwise_pass;
  j["augmented_hurwitz"] = r.augmented_hurwitz;
  j["observability_ok"] = r.observability_ok;
  j["p_q_positive"] = r.p_q_positive;
  j["lmi_lambda_max"] = r.lmi_lambda_max;
  j["elementwise_min"] = r.elementwise_min;
  j["alc_shifted_min"] = r.alc_shifted_min;
  j["observability_rank"] = r.observability_rank;
  return j;
}

json tank_parameters_to_json(const models::TankParameters& p) {
  json j;
  j["units"] = {{"geometry", "m"}, {"levels", "m"}, {"valve_length", "m"}, {"flow", "m^3/s"}};
  j["a"] = p.a;
  j["b"] = p.b;
  j["c"] = p.c;
  j["w"] = p.w;
  j["R"] = p.R;
  j["H2max"] = p.H2max;
  j["H3max"] = p.H3max;
  for (int i = 0; i < 3; ++i) {
    const std::string s = std::to_string(i + 1);
    j["C" + s] = p.C[static_cast<std::size_t>(i)];
    j["alpha" + s] = p.alpha[static_cast<std::size_t>(i)];
    j["H" + s + "0"] = p.H0[static_cast<std::size_t>(i)];
  }
  j["Q0"] = p.Q0;
  if (p.K) j["K"] = {(*p.K)[0], (*p.K)[1], (*p.K)[2]};
  return j;
}

models::TankParameters tank_parameters_from_json(const json& j) {
  const json& units = require(j, "units");
  const double fg = length_factor(unit_field(units, "geometry"), "geometry");
  const double fl = length_factor(unit_field(units, "levels"), "levels");
  const double fv = length_factor(unit_field(units, "valve_length"), "valve_length");
  const double fq = flow_factor(unit_field(units, "flow"));

  models::TankParameters p;
  p.a = fg * number(j, "a");
  p.b = fg * number(j, "b");
  p.c = fg * number(j, "c");
  p.w = fg * number(j, "w");
  p.R = fg * number(j, "R");
  p.H2max = fg * number(j, "H2max");
  p.H3max = fg * number(j, "H3max");
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string s = std::to_string(i + 1);
    p.alpha[i] = number(j, "alpha" + s);
    // Q = C H^alpha in (flow, valve_length) units  =>  C_SI = fq * C * fv^-alpha
    p.C[i] = fq * number(j, "C" + s) * std::pow(fv, -p.alpha[i]);
    p.H0[i] = fl * number(j, "H" + s + "0");
  }
  p.Q0 = fq * number(j, "Q0");
  if (j.contains("K") && !j["K"].is_null()) {
    const Vector k = vector_from_json(j["K"], "K");
    if (k.size() != 3) throw ParseError("field 'K' must have three entries");
    p.K = std::array<double, 3>{k(0) * fq / fl, k(1) * fq / fl, k(2) * fq / fl};
  }
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return p;
}

json problem_to_json(const lmi::LmiFeasibilityProblem& p) {
  json j;
  j["dim"] = p.dim;
  j["variable_names"] = p.variable_names;
  j["lower_bounds"] = json::array();
  j["upper_bounds"] = json::array();
  for (int i = 0; i < p.dim; ++i) {
    j["lower_bounds"].push_back(finite_or_null(p.lower_bounds(i)));
    j["upper_bounds"].push_back(finite_or_null(p.upper_bounds(i)));
  }
  j["matrix_constraints"] = json::array();
  for (const auto& mc : p.matrix_constraints) {
    json c{{"name", mc.name}, {"sense", "neg_def"}, {"margin", mc.margin}, {"constant", matrix_to_json(mc.constant)}};
    c["coefficients"] = json::array();
    for (const auto& f : mc.coefficients) c["coefficients"].push_back(matrix_to_json(f));
    j["matrix_constraints"].push_back(std::move(c));
  }
  j["elementwise_constraints"] = json::array();
  for (const auto& ec : p.elementwise_constraints) {
    json c{{"name", ec.name}, {"sense", "geq_zero"}, {"slack", ec.slack}, {"constant", matrix_to_json(ec.constant)}};
    c["coefficients"] = json::array();
    for (const auto& g : ec.coefficients) c["coefficients"].push_back(matrix_to_json(g));
    j["elementwise_constraints"].push_back(std::move(c));
  }
  return j;
}

lmi::LmiFeasibilityProblem problem_from_json(const json& j) {
  lmi::LmiFeasibilityProblem p;
  p.dim = static_cast<int>(number(j, "dim"));
  if (j.contains("variable_names")) p.variable_names = j["variable_names"].get<std::vector<std::string>>();
  auto bounds = [&](const std::string& field, double missing) {
    const json& arr = require(j, field);
    if (!arr.is_array()) throw ParseError("field '" + field + "' must be an array");
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = arr[i].is_null() ? missing : arr[i].get<double>();
    }
    return v;
  };
  p.lower_bounds = bounds("lower_bounds", -lmi::kInf);
  p.upper_bounds = bounds("upper_bounds", lmi::kInf);
  for (const auto& c : j.value("matrix_constraints", json::array())) {
    lmi::MatrixConstraint mc;
    mc.name = c.value("name", std::string{});
    mc.margin = c.value("margin", lmi::kDefaultMargin);
    mc.constant = matrix_from_json(require(c, "constant"), "constant");
    for (const auto& f : require(c, "coefficients")) mc.coefficients.push_back(matrix_from_json(f, "coefficients"));
    p.matrix_constraints.push_back(std::move(mc));
  }
  for (const auto& c : j.value("elementwise_constraints", json::array())) {
    lmi::ElementwiseConstraint ec;
    ec.name = c.value("name", std::string{});
    ec.slack = c.value("slack", lmi::kDefaultSlack);
    ec.constant = matrix_from_json(require(c, "constant"), "constant");
    for (const auto& g : require(c, "coefficients")) ec.coefficients.push_back(matrix_from_json(g, "coefficients"));
    p.elementwise_constraints.push_back(std::move(ec));
  }
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return p;
}

json outcome_to_json(const lmi::LmiOutcome& o) {
  return {{"status", lmi::to_string(o.status)},
          {"z", vector_to_json(o.z)},
          {"iterations", o.iterations},
          {"worst_violation", finite_or_null(o.worst_violation)},
          {"detail", o.detail}};
}

json sim_config_to_json(const SimulationConfig& c) {
  json j;
  j["x0"] = vector_to_json(c.x0);
  j["xhat0"] = vector_to_json(c.xhat0);
  j["horizon"] = c.horizon;
  j["step"] = c.step;
  j["event_time_tol"] = c.event_time_tol;
  j["feedback_gain"] = c.feedback_gain ? matrix_to_json(*c.feedback_gain) : json(nullptr);
  j["use_absolute_output"] = c.use_absolute_output;
  j["output_floor"] = c.output_floor ? json(*c.output_floor) : json(nullptr);
  j["admissibility_guard"] = c.admissibility_guard;
  return j;
}

SimulationConfig sim_config_from_json(const json& j) {
  SimulationConfig c;
  c.x0 = vector_from_json(require(j, "x0"), "x0");
  if (j.contains("xhat0")) c.xhat0 = vector_from_json(j["xhat0"], "xhat0");
  c.horizon = number(j, "horizon");
  c.step = number(j, "step");
  c.event_time_tol = number(j, "event_time_tol");
  if (j.contains("feedback_gain") && !j["feedback_gain"].is_null()) {
    c.feedback_gain = matrix_from_json(j["feedback_gain"], "feedback_gain");
  }
  c.use_absolute_output = j.value("use_absolute_output", false);
  if (j.contains("output_floor") && !j["output_floor"].is_null()) c.output_floor = number(j, "output_floor");
  c.admissibility_guard = j.value("admissibility_guard", true);
  return c;
}

void write_trace_csv(std::ostream& os, const SimulationTrace& tr) {
  const std::size_t n = tr.x.empty() ? 0 : static_cast<std::size_t>(tr.x.front().size());
  const std::size_t r = tr.y.empty() ? 0 : static_cast<std::size_t>(tr.y.front().size());
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",xhat" << i;
  for (std::size_t i = 1; i <= r; ++i) os << ",y" << i;
  for (std::size_t i = 1; i <= r; ++i) os << ",eps" << i;
  os << ",event\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << format_double(tr.times[k]);
    for (Eigen::Index i = 0; i < tr.x[k].size(); ++i) os << ',' << format_double(tr.x[k](i));
    for (Eigen::Index i = 0; i < tr.xhat[k].size(); ++i) os << ',' << format_double(tr.xhat[k](i));
    for (Eigen::Index i = 0; i < tr.y[k].size(); ++i) os << ',' << format_double(tr.y[k](i));
    for (Eigen::Index i = 0; i < tr.epsilon[k].size(); ++i) os << ',' << format_double(tr.epsilon[k](i));
    os << ',' << (tr.is_event[k] ? 1 : 0) << '\n';
  }
}

std::string trace_csv(const SimulationTrace& tr) {
  std::ostringstream os;
  write_trace_csv(os, tr);
  return os.str();
}

json events_to_json(const SimulationTrace& tr) {
  json arr = json::array();
  for (std::size_t k = 0; k < tr.events.size(); ++k) {
    const auto& ev = tr.events[k];
    arr.push_back({{"k", ev.k},
                   {"t_k", ev.t},
                   {"y_k", vector_to_json(ev.y)},
                   {"iet", k == 0 ? json(nullptr) : json(ev.t - tr.events[k - 1].t)}});
  }
  return arr;
}

}  // namespace posobs::io
