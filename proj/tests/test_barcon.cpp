#include <doctest.h>

#include <sstream>

#include "offering/barcon.hpp"
#include "support.hpp"

using namespace offering;
using testing_support::Gen;
using testing_support::relative_difference;

namespace {

void check_steps(const std::vector<CurveStep>& steps, const std::vector<std::pair<double, double>>& expected) {
  REQUIRE(steps.size() == expected.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    CHECK(steps[s].quantity == expected[s].first);
    CHECK(steps[s].price == doctest::Approx(expected[s].second).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("worked example curves") {
  const UnitSpec unit = calibrate_example_unit();
  const BarConRun run = barcon_run(unit, example_barcon_config());
  REQUIRE(run.curve.horizon() == 3);
  check_steps(run.curve.hours[0], {{0, 52}, {0, 53}, {160, 54}});
  check_steps(run.curve.hours[1], {{0, 53}, {160, 54}, {215, 55}});
  check_steps(run.curve.hours[2], {{160, 59}, {215, 60}, {270, 61}});
  CHECK(run.curve.check(unit.p_max).empty());
  CHECK(run.solves.size() == 3);
}

TEST_CASE("acceptance of the worked example curves") {
  const UnitSpec unit = calibrate_example_unit();
  const OfferingCurve curve = barcon_run(unit, example_barcon_config()).curve;
  CHECK(simulate_acceptance(curve, {52, 53, 61}) == std::vector<double>{0, 0, 270});
  CHECK(simulate_acceptance(curve, {54, 53, 59}) == std::vector<double>{160, 0, 160});
  CHECK(simulate_acceptance(curve, {100, 100, 100}) == std::vector<double>{160, 215, 270});
  CHECK(simulate_acceptance(curve, {10, 10, 10}) == std::vector<double>{0, 0, 0});
}

TEST_CASE("worked example audit") {
  const UnitSpec unit = calibrate_example_unit();
  const OfferingCurve curve = barcon_run(unit, example_barcon_config()).curve;
  const auto findings = audit_curves(unit, curve, example_scenarios());
  REQUIRE(findings.size() == 2);

  const AuditFinding& ramp = findings[0];
  CHECK(ramp.kind == FindingKind::kRampInfeasible);
  CHECK(ramp.accepted == std::vector<double>{0, 0, 270});
  CHECK(ramp.violations.has(ConstraintFamily::kRampUp, 3));

  const AuditFinding& poor = findings[1];
  CHECK(poor.kind == FindingKind::kSuboptimal);
  CHECK(poor.accepted == std::vector<double>{160, 0, 160});
  CHECK(poor.achieved_profit == doctest::Approx(544).epsilon(0.01));
  CHECK(poor.ex_post_profit == doctest::Approx(672).epsilon(0.01));
  CHECK(check_feasibility(unit, poor.ex_post_schedule).empty());

  // At the highest prices the curve clears at the planned optimum.
  CHECK(audit_curves(unit, curve, {{54, 55, 61}}).empty());
}

TEST_CASE("degenerate ladders") {
  const UnitSpec unit = calibrate_example_unit();
  BarConConfig one = example_barcon_config();
  one.iterations = 1;
  const BarConRun single = barcon_run(unit, one);
  const auto nominal = solve(build_nominal(unit, one.price_max));
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(single.curve.hours[t].size() == 1);
    CHECK(single.curve.hours[t][0].price == one.price_max[t]);
    CHECK(single.curve.hours[t][0].quantity == nominal.schedule.p[t]);
  }

  BarConConfig flat = example_barcon_config();
  flat.shortfall = 0.0;
  flat.iterations = 4;
  const BarConRun collapsed = barcon_run(unit, flat);
  for (const auto& steps : collapsed.curve.hours) CHECK(steps.size() == 1);
}

TEST_CASE("merge repair keeps curves valid") {
  // Quantities fall as the price rises in hour 1: lifted to the running maximum.
  const OfferingCurve c = merge_curves({{10, 5}, {20, 6}, {30, 7}}, {{100, 0}, {50, 10}, {80, 20}});
  check_steps(c.hours[0], {{100, 10}, {100, 20}, {100, 30}});
  check_steps(c.hours[1], {{0, 5}, {10, 6}, {20, 7}});
  CHECK_FALSE(c.diagnostics.empty());
  CHECK(c.check(100).empty());

  const OfferingCurve many = merge_curves({{1}, {2}, {3}, {4}, {5}}, {{1}, {2}, {3}, {4}, {5}}, 4);
  CHECK(many.hours[0].size() == 5);
  CHECK_FALSE(many.diagnostics.empty());
}

TEST_CASE("random ladders") {
  Gen g(61);
  for (int trial = 0; trial < 20; ++trial) {
    const UnitSpec unit = g.unit();
    BarConConfig config;
    config.price_max = g.reals(6, 40.0, 80.0);
    for (double p : config.price_max) config.price_min.push_back(p - g.real(0.0, 30.0));
    config.iterations = g.integer(1, 5);
    config.shortfall = g.real(0.0, 1.0 / std::max(1, config.iterations - 1));
    const BarConRun shortcut = barcon_run(unit, config);
    const BarConRun dualized = barcon_run(unit, config, {}, true);
    CHECK(shortcut.curve.check(unit.p_max).empty());
    for (int k = 0; k < config.iterations; ++k)
      CHECK(relative_difference(shortcut.solves[k].objective, dualized.solves[k].objective) <= 1e-6);
    for (const auto& steps : shortcut.curve.hours) CHECK(steps.size() <= static_cast<std::size_t>(config.iterations));

    // Accepted quantities never fall as the realized price rises.
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> low = g.reals(6, 0.0, 90.0);
      std::vector<double> high(low);
      for (auto& x : high) x += g.real(0.0, 20.0);
      const auto a = simulate_acceptance(shortcut.curve, low);
      const auto b = simulate_acceptance(shortcut.curve, high);
      for (std::size_t t = 0; t < 6; ++t) CHECK(a[t] <= b[t]);
    }
    for (const auto& f : audit_curves(unit, shortcut.curve, {g.reals(6, 20.0, 90.0)})) {
      CHECK(check_feasibility(unit, f.ex_post_schedule).empty());
      if (f.kind == FindingKind::kSuboptimal) CHECK(f.achieved_profit < f.ex_post_profit);
      else CHECK_FALSE(f.violations.empty());
    }
  }
}

TEST_CASE("curve file round trip and config checks") {
  const UnitSpec unit = calibrate_example_unit();
  const OfferingCurve curve = barcon_run(unit, example_barcon_config()).curve;
  std::stringstream io;
  write_curve(io, curve);
  CHECK(io.str().rfind("hour,step,quantity_mw,price_eur_mwh\n", 0) == 0);
  const OfferingCurve back = read_curve(io);
  REQUIRE(back.horizon() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(back.hours[t].size() == curve.hours[t].size());
    for (std::size_t s = 0; s < curve.hours[t].size(); ++s) {
      CHECK(back.hours[t][s].quantity == curve.hours[t][s].quantity);
      CHECK(back.hours[t][s].price == curve.hours[t][s].price);
    }
  }

  BarConConfig bad = example_barcon_config();
  bad.shortfall = 0.6;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = example_barcon_config();
  bad.price_min[0] = 100;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = example_barcon_config();
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}
