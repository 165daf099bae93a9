#include <doctest.h>

#include <array>
#include <sstream>

#include "offering/units.hpp"
#include "support.hpp"

using namespace offering;
using testing_support::Gen;

namespace {

Schedule cold_start(const UnitSpec& unit, std::vector<double> p) {
  return schedule_from_dispatch(unit, p);
}

// Quadratic through three points by Cramer's rule.
std::array<double, 3> quadratic_through(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  auto det = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const double d = det(x[0] * x[0], x[0], 1, x[1] * x[1], x[1], 1, x[2] * x[2], x[2], 1);
  const double da = det(y[0], x[0], 1, y[1], x[1], 1, y[2], x[2], 1);
  const double db = det(x[0] * x[0], y[0], 1, x[1] * x[1], y[1], 1, x[2] * x[2], y[2], 1);
  const double dc = det(x[0] * x[0], x[0], y[0], x[1] * x[1], x[1], y[1], x[2] * x[2], x[2], y[2]);
  return {da / d, db / d, dc / d};
}

// Random walk through the feasible set: commitment respecting the minimum
// times, outputs drawn inside the ramp window of each hour.
Schedule random_feasible(const UnitSpec& unit, std::size_t horizon, Gen& g) {
  std::vector<int> u(horizon);
  std::vector<double> p(horizon);
  int state = unit.initial.on ? 1 : 0;
  int dwell = unit.initial.dwell_hours;
  double prev = unit.initial.output_mw;
  for (std::size_t t = 0; t < horizon; ++t) {
    const int min_dwell = state ? unit.min_up : unit.min_down;
    bool flip = dwell >= min_dwell && g.coin(0.3);
    if (flip && state == 1 && prev > unit.ramp_shutdown) flip = false;
    const int next = flip ? 1 - state : state;
    double lo = 0.0, hi = 0.0;
    if (next == 1 && state == 0) {
      lo = unit.p_min;
      hi = std::min(unit.p_max, unit.ramp_startup);
    } else if (next == 1) {
      lo = std::max(unit.p_min, prev - unit.ramp_down);
      hi = std::min(unit.p_max, prev + unit.ramp_up);
    }
    // Stay low enough to keep a shutdown possible next hour now and then.
    if (next == 1 && g.coin(0.3)) hi = std::max(lo, std::min(hi, unit.ramp_shutdown));
    u[t] = next;
    p[t] = next ? g.real(lo, hi) : 0.0;
    dwell = next == state ? dwell + 1 : 1;
    state = next;
    prev = p[t];
  }
  return schedule_from_commitment(unit, u, p);
}

}  // namespace

TEST_CASE("example unit cost points") {
  const UnitSpec unit = calibrate_example_unit();
  CHECK(unit.running_cost(160) == doctest::Approx(8768).epsilon(1e-12));
  CHECK(std::abs(unit.running_cost(215) - 11752) <= 1.0);
  CHECK(std::abs(unit.running_cost(270) - 14917) <= 1.0);
  CHECK(std::abs(unit.running_cost(440) - 25848) <= 10.0);

  const auto c = quadratic_through({160, 215, 270}, {8768, 11752, 14917});
  CHECK(unit.cost_a == doctest::Approx(c[0]).epsilon(1e-9));
  CHECK(unit.cost_b == doctest::Approx(c[1]).epsilon(1e-9));
  CHECK(unit.cost_fixed == doctest::Approx(c[2]).epsilon(1e-9));
  CHECK(c[0] == doctest::Approx(0.02992).epsilon(1e-3));
  CHECK(c[1] == doctest::Approx(43.04).epsilon(1e-3));
  CHECK(c[2] == doctest::Approx(1116.4).epsilon(1e-3));

  CHECK(unit.p_min == 160);
  CHECK(unit.p_max == 440);
  CHECK(unit.ramp_startup == 160);
  CHECK(unit.ramp_up == 55);
  CHECK(unit.validate().empty());
}

TEST_CASE("generation cost of simple schedules") {
  const UnitSpec unit = calibrate_example_unit();
  const auto one = generation_cost(unit, cold_start(unit, {160}));
  CHECK(one.total == doctest::Approx(8768).epsilon(1e-12));
  CHECK(generation_cost(unit, Schedule::all_off(24)).total == 0.0);

  const auto three = generation_cost(unit, cold_start(unit, {160, 215, 270}));
  double sum = 0.0;
  for (double c : three.per_hour) sum += c;
  CHECK(sum == doctest::Approx(three.total).epsilon(1e-14));

  Schedule bad = cold_start(unit, {160, 215});
  bad.suc.pop_back();
  CHECK_THROWS_AS(generation_cost(unit, bad), InputError);
}

TEST_CASE("feasibility of the worked example dispatches") {
  const UnitSpec unit = calibrate_example_unit();
  const auto jump = check_feasibility(unit, cold_start(unit, {0, 0, 270}));
  CHECK(jump.has(ConstraintFamily::kRampUp, 3));
  CHECK(check_feasibility(unit, cold_start(unit, {160, 215, 270})).empty());
  CHECK(check_feasibility(unit, Schedule::all_off(24)).empty());
  // Ramp-up limit while running: 160 -> 216 exceeds 55 MW/h.
  CHECK(check_feasibility(unit, cold_start(unit, {160, 216})).has(ConstraintFamily::kRampUp, 2));
}

TEST_CASE("minimum times and startup cost with history") {
  UnitSpec unit;
  unit.p_min = 10;
  unit.p_max = 100;
  unit.ramp_up = unit.ramp_down = unit.ramp_startup = unit.ramp_shutdown = 100;
  unit.min_up = 3;
  unit.min_down = 2;
  unit.cost_b = 10;
  unit.suc_schedule = {5, 8, 12};
  unit.initial = {false, 1, 0.0};

  // Restart one hour after the history's shutdown breaks the min-down time.
  CHECK(check_feasibility(unit, schedule_from_dispatch(unit, {50, 50, 50})).has(ConstraintFamily::kMinDown, 1));
  unit.initial.dwell_hours = 3;
  const Schedule ok = schedule_from_dispatch(unit, {50, 50, 50, 0, 0});
  CHECK(check_feasibility(unit, ok).empty());
  CHECK(ok.suc[0] == 12.0);  // off for at least three hours before
  CHECK(check_feasibility(unit, schedule_from_dispatch(unit, {50, 50, 0})).has(ConstraintFamily::kMinUp, 3));

  const Schedule restart = schedule_from_dispatch(unit, {50, 50, 50, 0, 0, 50});
  CHECK(restart.suc[5] == 8.0);  // two hours off
  Schedule cheap = restart;
  cheap.suc[5] = 5.0;
  CHECK(check_feasibility(unit, cheap).has(ConstraintFamily::kStartupCost, 6));
}

TEST_CASE("cost is convex in output") {
  Gen g(11);
  for (int trial = 0; trial < 500; ++trial) {
    const UnitSpec unit = g.unit();
    const double p = g.real(unit.p_min, unit.p_max);
    const double q = g.real(unit.p_min, unit.p_max);
    const double alpha = g.real(0.0, 1.0);
    const double mix = unit.running_cost(alpha * p + (1 - alpha) * q);
    const double chord = alpha * unit.running_cost(p) + (1 - alpha) * unit.running_cost(q);
    CHECK(mix <= chord + 1e-9 * std::max(1.0, std::abs(chord)));
  }
}

TEST_CASE("mutations are reported under the family they break") {
  Gen g(12);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const UnitSpec unit = g.unit(4);
    const Schedule s = random_feasible(unit, 12, g);
    const auto base = check_feasibility(unit, s);
    REQUIRE_MESSAGE(base.empty(), base);
    const std::size_t t = static_cast<std::size_t>(g.integer(0, 11));
    const int hour = static_cast<int>(t) + 1;
    Schedule m = s;
    const bool on = s.u[t] == 1;
    const bool continuing = on && (t == 0 ? unit.initial.on : s.u[t - 1] == 1);
    const double prev = t == 0 ? unit.initial.output_mw : s.p[t - 1];

    if (on) {
      m.p[t] = unit.p_max + 1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kOutputBounds, hour));
    } else {
      m.p[t] = 1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kOutputBounds, hour));
      m.p[t] = -1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kDomain, hour));
    }
    m = s;
    m.w[t] = 1 - m.w[t];
    CHECK(check_feasibility(unit, m).has(ConstraintFamily::kLogical, hour));
    m = s;
    m.u[t] = 2;
    CHECK(check_feasibility(unit, m).has(ConstraintFamily::kDomain, hour));

    if (continuing) {
      m = s;
      m.p[t] = prev + unit.ramp_up + 1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kRampUp, hour));
      m.p[t] = prev - unit.ramp_down - 1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kRampDown, hour));
    }
    if (s.v[t] == 1 && s.suc[t] > 0.0) {
      m = s;
      m.suc[t] -= 1.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kStartupCost, hour));
    }
    if (s.v[t] == 1 && unit.min_up >= 2 && t + 1 < s.horizon()) {
      m = s;
      m.u[t + 1] = 0;
      m.p[t + 1] = 0.0;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kMinUp, hour + 1));
      ++checked;
    }
    if (s.w[t] == 1 && unit.min_down >= 2 && t + 1 < s.horizon()) {
      m = s;
      m.u[t + 1] = 1;
      CHECK(check_feasibility(unit, m).has(ConstraintFamily::kMinDown, hour + 1));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("unit file round trip and errors") {
  const UnitSpec unit = calibrate_example_unit();
  std::stringstream buffer;
  write_unit(buffer, unit);
  const UnitSpec back = read_unit(buffer);
  CHECK(back.cost_a == unit.cost_a);
  CHECK(back.cost_b == unit.cost_b);
  CHECK(back.cost_fixed == unit.cost_fixed);
  CHECK(back.p_max == unit.p_max);
  CHECK(back.suc_schedule == unit.suc_schedule);

  std::string text = buffer.str();
  std::size_t corrupt_line = 1;
  const auto at = text.find("p_max");
  for (std::size_t i = 0; i < at; ++i) corrupt_line += text[i] == '\n';
  text.replace(at, text.find('\n', at) - at, "p_max = lots");
  std::istringstream bad(text);
  try {
    read_unit(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(e.line() == corrupt_line);
    CHECK(std::string(e.what()).find("line " + std::to_string(corrupt_line)) != std::string::npos);
  }
  std::istringstream unknown("id = x\ncolour = red\n");
  CHECK_THROWS_AS(read_unit(unknown), InputError);
}

TEST_CASE("validation") {
  UnitSpec unit = calibrate_example_unit();
  unit.ramp_startup = 100;
  const auto warnings = unit.validate();
  CHECK(warnings.size() == 1);

  unit = calibrate_example_unit();
  unit.suc_schedule = {10, 5};
  CHECK_THROWS_AS(unit.validate(), InputError);
  unit = calibrate_example_unit();
  unit.cost_a = -1;
  CHECK_THROWS_AS(unit.validate(), InputError);
  unit = calibrate_example_unit();
  unit.initial = {false, 1, 20.0};
  CHECK_THROWS_AS(unit.validate(), InputError);
  unit = calibrate_example_unit();
  unit.min_up = 0;
  CHECK_THROWS_AS(unit.validate(), InputError);
}
