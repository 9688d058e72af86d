#pragma once

// File formats: system / design / tank-parameter / LMI-problem / manifest JSON
// documents, the trace CSV and the event-log JSON.

#include "posobs/etsim.hpp"
#include "posobs/lmi.hpp"
#include "posobs/models.hpp"
#include "posobs/synth.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace posobs::io {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

/// Wraps JSON syntax errors and schema violations with the offending field.
class ParseError : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// "%.17g" formatting used for CSV cells.
std::string format_double(double v);

json matrix_to_json(const Matrix& m);
json vector_to_json(const Vector& v);
Matrix matrix_from_json(const json& j, const std::string& field);
Vector vector_from_json(const json& j, const std::string& field);

// {label, A, B?, C, equilibrium?}
json system_to_json(const PositiveLinearSystem& sys);
PositiveLinearSystem system_from_json(const json& j);

// {L, P_diag, Q_diag, W, lambda, lmi_margin, elementwise_margin}
json design_to_json(const ObserverDesign& d);
ObserverDesign design_from_json(const json& j);

json report_to_json(const AnalysisReport& r);
json report_to_json(const DesignReport& r);

// Field names are the usual three-tank parameter names, plus a "units" block:
// {"geometry": "cm"|"m"|"mm", "levels": ..., "valve_length": ..., "flow": "m^3/s"|"cm^3/s"|"l/s"}
// geometry: a b c w R H2max H3max; levels: H10 H20 H30; valve_length: the
// length unit of H inside C_i H^alpha_i; flow: C_i outputs, Q0 and K numerators.
// K is in flow per levels unit.
json tank_parameters_to_json(const models::TankParameters& p);
models::TankParameters tank_parameters_from_json(const json& j);

json problem_to_json(const lmi::LmiFeasibilityProblem& p);
lmi::LmiFeasibilityProblem problem_from_json(const json& j);
json outcome_to_json(const lmi::LmiOutcome& o);

json sim_config_to_json(const SimulationConfig& c);
SimulationConfig sim_config_from_json(const json& j);

/// Columns: t, x1..xn, xhat1..xhatn, y1..yr, eps1..epsr, event
void write_trace_csv(std::ostream& os, const SimulationTrace& tr);
std::string trace_csv(const SimulationTrace& tr);

/// [{k, t_k, y_k, iet}], iet null for the first event
json events_to_json(const SimulationTrace& tr);

}  // namespace posobs::io
