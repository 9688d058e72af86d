#pragma once

// Benchmark plants: a 2-state academic positive system and the linearized
// three-tank process with variable cross-sections. All quantities are SI
// (meters, seconds, m^3/s) once constructed.

#include "posobs/posys.hpp"

#include <array>
#include <optional>

namespace posobs::models {

/// x' = [[-1, 3], [0, -1]] x,  y = [1, 0] x
PositiveLinearSystem example1();

struct TankParameters {
  // geometry [m]
  double a = 0, b = 0, c = 0, w = 0, R = 0;
  double H2max = 0, H3max = 0;
  // outflow Q_i = C_i H_i^alpha_i with H in m and Q in m^3/s
  std::array<double, 3> C{};
  std::array<double, 3> alpha{};
  std::array<double, 3> H0{};  // equilibrium levels [m]
  double Q0 = 0;               // steady-state inflow [m^3/s]
  std::optional<std::array<double, 3>> K;  // u = -K h, [m^3/s per m]

  /// Throws InvalidInput when a geometric or exponent invariant fails.
  void validate() const;

  /// Reference rig values (geometry converted from cm to m).
  static TankParameters reference();
};

struct LinearizedModel {
  Matrix A;  // 3x3
  Matrix B;  // 3x1
  Matrix C;  // 1x3
  Vector H0;
  std::array<double, 3> areas{};
};

/// Cross-sections at levels H: a*w, w*(c + b*H2/H2max), w*sqrt(R^2 - (H3max - H3)^2).
std::array<double, 3> tank_areas(const TankParameters& p, const std::array<double, 3>& H);

LinearizedModel tank_linearize(const TankParameters& p);

/// Linearized plant as a positive system with B and the equilibrium attached.
PositiveLinearSystem tank_system(const LinearizedModel& m);

struct ClosedLoop {
  Matrix A_cl;
  bool metzler = false;
};

/// A - B K. The Metzler flag is reported, not enforced.
ClosedLoop tank_closed_loop(const LinearizedModel& m, const Matrix& K);

/// C_i H0_i^alpha_i - Q0 for each tank (zero at a consistent equilibrium).
std::array<double, 3> steady_state_residuals(const TankParameters& p);

}  // namespace posobs::models
