#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "posobs/etsim.hpp"
#include "posobs/models.hpp"

#include <cmath>

using namespace posobs;
using matcore::make_matrix;
using matcore::make_vector;

namespace {

ObserverDesign reference_design() {
  return ObserverDesign::from_gain(make_vector({0.3655, 1.1736}), make_vector({0.4056, 0.9079}),
                                   make_matrix({{0.9037}, {0.0}}), 2.6341);
}

SimulationConfig example_config(double horizon = 20.0) {
  SimulationConfig cfg;
  cfg.x0 = make_vector({1.2, 1.8});
  cfg.xhat0 = make_vector({2.0, 2.0});
  cfg.horizon = horizon;
  cfg.step = 1e-3;
  return cfg;
}

}  // namespace

TEST_CASE("trigger_violated") {
  const TriggerConfig t(0.3, 1.5);
  const double y = 2.0;
  CHECK_FALSE(etsim::trigger_violated(make_vector({0.5 * y}), make_vector({y}), t));
  CHECK(etsim::trigger_violated(make_vector({t.threshold_coeff() * y}), make_vector({y}), t));
  CHECK(etsim::trigger_violated(make_vector({0.0}), make_vector({0.0}), t));
  CHECK_THROWS_AS(etsim::trigger_violated(make_vector({0.0, 1.0}), make_vector({0.0}), t), InvalidInput);
}

TEST_CASE("trigger_function sign") {
  const TriggerConfig t(0.3, 1.5);
  CHECK(etsim::trigger_function(make_vector({0.5}), make_vector({1.0}), t, true) < 0.0);
  CHECK(etsim::trigger_function(make_vector({-0.1}), make_vector({1.0}), t, true) > 0.0);
  CHECK(etsim::trigger_function(make_vector({-0.1}), make_vector({1.0}), t, false) < 0.0);
}

TEST_CASE("min_iet_bound") {
  const Matrix a = models::example1().A();
  CHECK(etsim::min_iet_bound(a, 0.3) == doctest::Approx(0.0699).epsilon(5e-4 / 0.0699));
  CHECK(etsim::min_iet_bound(a, 1.0) == doctest::Approx(0.1514).epsilon(5e-4 / 0.1514));
  CHECK(etsim::min_iet_bound(2.0 * a, 0.5) == doctest::Approx(0.5 * etsim::min_iet_bound(a, 0.5)));
  CHECK(etsim::min_iet_bound(a, 1e9) == doctest::Approx(1.0 / matcore::spectral_norm(a)));
  CHECK_THROWS_AS(etsim::min_iet_bound(Matrix::Zero(2, 2), 0.3), InvalidInput);
  CHECK_THROWS_AS(etsim::min_iet_bound(a, 0.0), InvalidInput);

  const auto curve = etsim::iet_curve(a, {0.3, 0.5, 0.9, 1.0});
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second > curve[i - 1].second);
}

TEST_CASE("example1 run with the reference design") {
  const auto sys = models::example1();
  const TriggerConfig trig(0.3, 1.5);
  const auto d = reference_design();
  const auto tr = etsim::simulate(sys, d, trig, example_config());

  CHECK(tr.events.front().t == 0.0);
  for (std::size_t k = 1; k < tr.events.size(); ++k) CHECK(tr.events[k].t > tr.events[k - 1].t);
  CHECK(tr.times.back() == 20.0);
  CHECK(tr.transmissions == static_cast<int>(tr.events.size()));

  const auto audit = etsim::positivity_audit(tr);
  CHECK(audit.x_nonneg);
  CHECK(audit.xhat_nonneg);
  CHECK(audit.e_nonneg);
  CHECK(audit.eps_nonneg);

  CHECK(tr.e.back().norm() <= 1e-3 * tr.e.front().norm());
  CHECK(etsim::lyapunov_trace(tr, d).monotone);
  CHECK(etsim::zeno_report(tr, sys.A(), 0.3, 1e-10).satisfied);

  const auto v = etsim::lyapunov_trace(tr, d).values.front();
  CHECK(v == doctest::Approx(1.2 * 1.2 * 0.3655 + 1.8 * 1.8 * 1.1736 + 0.8 * 0.8 * 0.4056 + 0.2 * 0.2 * 0.9079));
}

TEST_CASE("events are localized on the trigger surface") {
  const auto sys = models::example1();
  const TriggerConfig trig(0.3, 1.5);
  const auto tr = etsim::simulate(sys, reference_design(), trig, example_config());
  REQUIRE(tr.events.size() > 3);
  for (std::size_t k = 1; k < tr.events.size(); ++k) {
    CHECK(tr.events[k].g_after >= 0.0);
    CHECK(tr.events[k].g_before < 0.0);
    CHECK(tr.events[k].g_after - tr.events[k].g_before < 1e-6);
  }
}

TEST_CASE("threshold-only trigger lets the error leave the orthant") {
  auto cfg = example_config();
  cfg.admissibility_guard = false;
  const auto tr = etsim::simulate(models::example1(), reference_design(), TriggerConfig(0.3, 1.5), cfg);
  const auto audit = etsim::positivity_audit(tr);
  CHECK_FALSE(audit.eps_nonneg);
  CHECK(tr.min_epsilon_seen < 0.0);
}

TEST_CASE("zero observer initial state gives a negative error") {
  auto cfg = example_config(2.0);
  cfg.xhat0 = Vector();
  const auto tr = etsim::simulate(models::example1(), reference_design(), TriggerConfig(0.3, 1.5), cfg);
  CHECK_FALSE(etsim::positivity_audit(tr).e_nonneg);
}

TEST_CASE("held-sample segment matches the matrix exponential") {
  const auto sys = models::example1();
  const auto d = reference_design();
  const TriggerConfig trig(0.3, 1e6);
  auto cfg = example_config(2.0);
  cfg.step = 0.01;
  const auto tr = etsim::simulate(sys, d, trig, cfg);
  REQUIRE(tr.transmissions == 1);
  const Vector exact =
      oracle::held_sample_solution(sys.A(), sys.C(), d.L, trig.beta(), cfg.x0, cfg.xhat0, cfg.horizon);
  Vector got(4);
  got << tr.x.back(), tr.xhat.back();
  CHECK((got - exact).norm() <= 1e-8 * exact.norm());
}

TEST_CASE("step halving shows fourth-order convergence") {
  const auto sys = models::example1();
  const auto d = reference_design();
  const TriggerConfig trig(0.3, 1e6);
  auto err = [&](double step) {
    auto cfg = example_config(2.0);
    cfg.step = step;
    const auto tr = etsim::simulate(sys, d, trig, cfg);
    const Vector exact =
        oracle::held_sample_solution(sys.A(), sys.C(), d.L, trig.beta(), cfg.x0, cfg.xhat0, cfg.horizon);
    Vector got(4);
    got << tr.x.back(), tr.xhat.back();
    return (got - exact).norm();
  };
  const double ratio = err(0.2) / err(0.1);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("output floor suppresses events near zero") {
  auto cfg = example_config(40.0);
  cfg.xhat0 = cfg.x0 * 1.1;
  const auto plain = etsim::simulate(models::example1(), reference_design(), TriggerConfig(0.3, 1.5), cfg);
  cfg.output_floor = 1e-3;
  const auto floored = etsim::simulate(models::example1(), reference_design(), TriggerConfig(0.3, 1.5), cfg);
  CHECK(floored.transmissions < plain.transmissions);
}

TEST_CASE("invalid configurations") {
  const auto sys = models::example1();
  const TriggerConfig trig(0.3, 1.5);
  auto cfg = example_config();
  cfg.horizon = 0.0;
  CHECK_THROWS_AS(etsim::simulate(sys, reference_design(), trig, cfg), InvalidInput);
  cfg = example_config();
  cfg.x0 = make_vector({1.0});
  CHECK_THROWS_AS(etsim::simulate(sys, reference_design(), trig, cfg), InvalidInput);
  cfg = example_config();
  cfg.event_time_tol = 1.0;
  CHECK_THROWS_AS(etsim::simulate(sys, reference_design(), trig, cfg), InvalidInput);
  cfg = example_config();
  cfg.use_absolute_output = true;
  CHECK_THROWS_AS(etsim::simulate(sys, reference_design(), trig, cfg), InvalidInput);
}

TEST_CASE("overflow aborts the run") {
  const PositiveLinearSystem sys(make_matrix({{400.0}}), make_matrix({{1.0}}));
  const auto d = ObserverDesign::from_gain(make_vector({1.0}), make_vector({1.0}), make_matrix({{0.0}}), 1.0);
  SimulationConfig cfg;
  cfg.x0 = make_vector({1.0});
  cfg.horizon = 10.0;
  cfg.step = 0.01;
  CHECK_THROWS_AS(etsim::simulate(sys, d, TriggerConfig(0.3, 1.5), cfg), SimulationAborted);
}

TEST_CASE("savings_report") {
  CHECK(etsim::savings_report(85, 400.0, 1.0).savings_pct == doctest::Approx(78.75));
  CHECK(etsim::savings_report(400, 400.0, 1.0).savings_pct == doctest::Approx(0.0));
  CHECK(etsim::savings_report(10, 400.0, 1.0).savings_pct == doctest::Approx(97.5));
  CHECK(etsim::savings_report(10, 400.0, 0.3).periodic_count == 1333);
  CHECK_THROWS_AS(etsim::savings_report(10, 400.0, 0.0), InvalidInput);
}

TEST_CASE("lyapunov trace of the zero trajectory") {
  SimulationTrace tr;
  tr.x = {Vector::Zero(2), Vector::Zero(2)};
  tr.e = tr.x;
  const auto res = etsim::lyapunov_trace(tr, reference_design());
  CHECK(res.monotone);
  CHECK(res.values[1] == 0.0);
}
