#include "posobs/models.hpp"

#include <cmath>

namespace posobs::models {

PositiveLinearSystem example1() {
  return PositiveLinearSystem(matcore::make_matrix({{-1.0, 3.0}, {0.0, -1.0}}),
                              matcore::make_matrix({{1.0, 0.0}}), std::nullopt, std::nullopt,
                              "example1");
}

void TankParameters::validate() const {
  for (double v : {a, b, c, w, R, H2max, H3max}) {
    if (!(v > 0) || !std::isfinite(v)) throw InvalidInput("tank: geometric lengths must be > 0");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(alpha[i] > 0 && alpha[i] <= 1)) throw InvalidInput("tank: flow exponents must lie in (0, 1]");
    if (!(C[i] > 0) || !std::isfinite(C[i])) throw InvalidInput("tank: valve coefficients must be > 0");
    if (!(H0[i] > 0) || !std::isfinite(H0[i])) throw InvalidInput("tank: equilibrium levels must be > 0");
  }
  if (!(H0[1] < H2max)) throw InvalidInput("tank: H20 must be below H2max");
  if (!(H0[2] < H3max)) throw InvalidInput("tank: H30 must be below H3max");
  if (!(R > H3max - H0[2])) throw InvalidInput("tank: R must exceed H3max - H30");
  if (!(Q0 >= 0) || !std::isfinite(Q0)) throw InvalidInput("tank: Q0 must be >= 0");
}

TankParameters TankParameters::reference() {
  TankParameters p;
  p.a = 0.25;
  p.b = 0.348;
  p.c = 0.10;
  p.w = 0.035;
  p.R = 0.364;
  p.H2max = 0.35;
  p.H3max = 0.35;
  p.C = {1.0057e-4, 1.1963e-4, 9.8008e-5};
  p.alpha = {0.5, 0.5, 0.5};
  p.H0 = {0.1425, 0.1007, 0.1500};
  p.Q0 = 3.7958e-5;
  p.K = std::array<double, 3>{0.1983e-3, 0.0765e-3, 0.0496e-3};
  return p;
}

std::array<double, 3> tank_areas(const TankParameters& p, const std::array<double, 3>& H) {
  const double d = p.H3max - H[2];
  const double disc = p.R * p.R - d * d;
  if (!(disc > 0)) throw InvalidInput("tank: level H3 outside the geometric range of tank 3");
  return {p.a * p.w, p.w * (p.c + p.b * H[1] / p.H2max), p.w * std::sqrt(disc)};
}

LinearizedModel tank_linearize(const TankParameters& p) {
  p.validate();
  const auto area = tank_areas(p, p.H0);
  // d/dH (C H^alpha) = C alpha / H^(1 - alpha)
  std::array<double, 3> g{};
  for (int i = 0; i < 3; ++i) g[i] = p.C[i] * p.alpha[i] / std::pow(p.H0[i], 1.0 - p.alpha[i]);

  LinearizedModel m;
  m.A = Matrix::Zero(3, 3);
  m.A(0, 0) = -g[0] / area[0];
  m.A(1, 0) = g[0] / area[1];
  m.A(1, 1) = -g[1] / area[1];
  m.A(2, 1) = g[1] / area[2];
  m.A(2, 2) = -g[2] / area[2];
  m.B = Matrix::Zero(3, 1);
  m.B(0, 0) = 1.0 / area[0];
  m.C = matcore::make_matrix({{0.0, 1.0, 0.0}});
  m.H0 = Vector(3);
  m.H0 << p.H0[0], p.H0[1], p.H0[2];
  m.areas = area;
  return m;
}

PositiveLinearSystem tank_system(const LinearizedModel& m) {
  return PositiveLinearSystem(m.A, m.C, m.B, m.H0, "three_tank");
}

ClosedLoop tank_closed_loop(const LinearizedModel& m, const Matrix& K) {
  if (K.rows() != m.B.cols() || K.cols() != m.A.cols()) {
    throw InvalidInput("tank_closed_loop: K must be 1x3");
  }
  ClosedLoop cl;
  cl.A_cl = m.A - m.B * K;
  cl.metzler = posys::is_metzler(cl.A_cl);
  return cl;
}

std::array<double, 3> steady_state_residuals(const TankParameters& p) {
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = p.C[i] * std::pow(p.H0[i], p.alpha[i]) - p.Q0;
  return r;
}

}  // namespace posobs::models
