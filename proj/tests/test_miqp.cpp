#include <doctest.h>

#include "offering/miqp.hpp"
#include "support.hpp"

using namespace offering;
using testing_support::Gen;
using testing_support::relative_difference;

namespace {

const std::vector<double> kHighest{54, 55, 61};

UncertaintyModel shifted(double shift) {
  return {kHighest, std::vector<double>(3, shift), 3};
}

void check_output(const SolveResult& r, const std::vector<double>& expected) {
  REQUIRE(r.schedule.p.size() == expected.size());
  for (std::size_t t = 0; t < expected.size(); ++t) CHECK(r.schedule.p[t] == expected[t]);
}

// Rounds the unit's MW data onto a grid so both oracle grids are exact.
UnitSpec on_grid(UnitSpec u, double step) {
  auto snap = [&](double x) { return std::max(step, std::round(x / step) * step); };
  u.p_min = std::round(u.p_min / step) * step;
  u.p_max = std::max(u.p_min + step, std::round(u.p_max / step) * step);
  u.ramp_up = snap(u.ramp_up);
  u.ramp_down = snap(u.ramp_down);
  u.ramp_startup = std::max(u.p_min, snap(u.ramp_startup));
  u.ramp_shutdown = std::max(u.p_min, snap(u.ramp_shutdown));
  if (u.initial.on) u.initial.output_mw = std::clamp(std::round(u.initial.output_mw / step) * step, u.p_min, u.p_max);
  return u;
}

}  // namespace

TEST_CASE("worked example: full-protection problems") {
  const UnitSpec unit = calibrate_example_unit();
  const auto c1 = solve(worst_case_equivalent(unit, shifted(0)));
  const auto c2 = solve(worst_case_equivalent(unit, shifted(1)));
  const auto c3 = solve(worst_case_equivalent(unit, shifted(2)));
  for (const auto* r : {&c1, &c2, &c3}) {
    CHECK(r->status == SolveStatus::kOptimal);
    CHECK(check_feasibility(unit, r->schedule).empty());
    CHECK(r->wall_seconds < 1.0);
  }
  check_output(c1, {160, 215, 270});
  check_output(c2, {0, 160, 215});
  check_output(c3, {0, 0, 160});
  CHECK(c1.objective == doctest::Approx(1498).epsilon(0.01));
  CHECK(c2.objective == doctest::Approx(1020).epsilon(0.01));
  CHECK(c3.objective == doctest::Approx(672).epsilon(0.01));

  const auto nominal = solve(build_nominal(unit, kHighest));
  check_output(nominal, {160, 215, 270});
  CHECK(solve(build_nominal(unit, {52, 53, 61})).objective == doctest::Approx(1075).epsilon(1e-6));
}

TEST_CASE("unprofitable prices keep the unit off") {
  const UnitSpec unit = calibrate_example_unit();
  const auto zero = solve(build_nominal(unit, std::vector<double>(24, 0.0)));
  CHECK(zero.status == SolveStatus::kOptimal);
  CHECK(zero.objective == 0.0);
  CHECK(zero.schedule.u == std::vector<int>(24, 0));
  const auto cheap = solve(build_nominal(unit, std::vector<double>(24, unit.cost_b - 1)));
  CHECK(cheap.objective == 0.0);
}

TEST_CASE("branch and bound against exhaustive search") {
  Gen g(51);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 6));
    const UnitSpec unit = g.unit();
    auto model = g.model(n);
    const RobustProblem problem = g.coin(0.3) ? build_nominal(unit, model.nominal) : build_robust(unit, model);
    const auto bb = solve(problem);
    const auto oracle = oracle_solve(problem, 1.0);
    const SolverConfig config;
    REQUIRE(bb.status == SolveStatus::kOptimal);
    CHECK(check_feasibility(unit, bb.schedule).empty());
    CHECK(bb.bound >= bb.objective);
    CHECK(bb.objective >= oracle.objective - config.allowed_gap(oracle.objective));
    CHECK(bb.objective <= oracle.objective + oracle_grid_error_bound(problem, 1.0));
  }
}

TEST_CASE("oracle: finer grids never lose more than the bound") {
  Gen g(52);
  for (int trial = 0; trial < 25; ++trial) {
    const UnitSpec unit = on_grid(g.unit(), 5.0);
    const auto model = g.model(static_cast<std::size_t>(g.integer(2, 5)));
    const RobustProblem problem = build_robust(unit, model);
    const auto fine = oracle_solve(problem, 1.0);
    const auto coarse = oracle_solve(problem, 5.0);
    CHECK(coarse.objective <= fine.objective + 1e-9 * std::max(1.0, std::abs(fine.objective)));
    CHECK(fine.objective - coarse.objective <= oracle_grid_error_bound(problem, 5.0) + 1e-9);

    UncertaintyModel no_budget = model;
    no_budget.budget = 0;
    CHECK(oracle_solve(build_robust(unit, no_budget), 1.0).objective ==
          doctest::Approx(oracle_solve(build_nominal(unit, model.nominal), 1.0).objective).epsilon(1e-12));
  }
  const UnitSpec unit = calibrate_example_unit();
  const auto example = oracle_solve(worst_case_equivalent(unit, shifted(0)), 1.0);
  check_output(example, {160, 215, 270});
  CHECK(std::abs(example.objective - solve(worst_case_equivalent(unit, shifted(0))).objective) <= 1.0);
  CHECK_THROWS_AS(oracle_solve(build_nominal(unit, std::vector<double>(13, 50.0)), 1.0), InputError);
}

TEST_CASE("relaxation bounds") {
  Gen g(53);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 12;
    const UnitSpec unit = g.unit(4);
    const RobustProblem problem = build_robust(unit, g.model(n));
    const auto best = solve(problem);
    REQUIRE(best.has_solution());
    const auto root = qp_relaxation(problem, PartialAssignment::none(n));
    REQUIRE(root.feasible);
    CHECK(root.bound >= best.objective - 1e-6 * std::max(1.0, std::abs(best.objective)));

    // With every binary fixed at the optimum, the relaxation is exact.
    PartialAssignment fixed = PartialAssignment::none(n);
    for (std::size_t t = 0; t < n; ++t) {
      fixed.u[t] = best.schedule.u[t];
      fixed.v[t] = best.schedule.v[t];
      fixed.w[t] = best.schedule.w[t];
    }
    const auto exact = qp_relaxation(problem, fixed);
    REQUIRE(exact.feasible);
    CHECK(relative_difference(exact.bound, best.objective) <= 1e-6);
  }

  // Starting without a startup indicator contradicts the logical constraint.
  const UnitSpec unit = calibrate_example_unit();
  PartialAssignment bad = PartialAssignment::none(3);
  bad.u[0] = 0;
  bad.u[1] = 1;
  bad.v[1] = 0;
  const auto pruned = qp_relaxation(build_nominal(unit, kHighest), bad);
  CHECK_FALSE(pruned.feasible);
}

TEST_CASE("partial fixings never bound below a consistent completion") {
  Gen g(56);
  for (int trial = 0; trial < 6; ++trial) {
    const UnitSpec unit = testing_support::plant(g);
    UncertaintyModel model = g.model(24);
    model.budget = g.integer(1, 24);
    const RobustProblem problem = build_robust(unit, model);
    const auto best = solve(problem);
    REQUIRE(best.status == SolveStatus::kOptimal);
    for (int k = 0; k < 150; ++k) {
      PartialAssignment fixed = PartialAssignment::none(24);
      for (std::size_t t = 0; t < 24; ++t)
        if (g.coin(0.35)) fixed.u[t] = best.schedule.u[t];
      const auto r = qp_relaxation(problem, fixed);
      REQUIRE(r.feasible);
      CHECK(r.bound >= best.objective - 1e-6 * std::abs(best.objective));
    }
  }
}

TEST_CASE("24-hour plant instances") {
  Gen g(54);
  for (int trial = 0; trial < 15; ++trial) {
    const UnitSpec unit = testing_support::plant(g);
    UncertaintyModel model = g.model(24);
    const RobustProblem problem = build_robust(unit, model);
    const auto a = solve(problem);
    const auto b = solve(problem);
    REQUIRE(a.status == SolveStatus::kOptimal);
    CHECK(check_feasibility(unit, a.schedule).empty());
    // Deterministic to the bit.
    CHECK(a.schedule.p == b.schedule.p);
    CHECK(a.schedule.u == b.schedule.u);
    CHECK(a.objective == b.objective);
    CHECK(a.nodes == b.nodes);
    // Re-optimised deviation duals price the chosen output exactly.
    double dual = model.budget * a.z;
    for (double q : a.q) dual += q;
    CHECK(std::abs(dual - eval_dev(model.deviation, a.schedule.p, model.budget).value) <= 1e-6);
    CHECK(relative_difference(problem.evaluate(a.schedule), a.objective) <= 1e-9);
  }
}

TEST_CASE("solver configuration") {
  SolverConfig c;
  c.validate();
  c.gap_tolerance = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.node_limit = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  CHECK(c.allowed_gap(0.0) == c.absolute_gap_tolerance);
  CHECK(c.allowed_gap(1e6) == doctest::Approx(1.0));

  // A node limit of one leaves the search open but still returns a schedule.
  Gen g(55);
  c.node_limit = 1;
  const UnitSpec unit = testing_support::plant(g);
  const auto r = solve(build_robust(unit, g.model(24)), c);
  CHECK(r.nodes <= 1);
  if (r.status == SolveStatus::kNodeLimit) CHECK(r.bound >= r.objective);
}
