#include "offering/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "offering/text_util.hpp"

namespace offering {

InputError::InputError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

std::vector<std::string> UnitSpec::validate() const {
  auto fail = [&](const std::string& msg) { throw InputError("unit '" + id + "': " + msg); };
  if (!(p_min >= 0.0) || !(p_min <= p_max)) fail("require 0 <= p_min <= p_max");
  if (!(ramp_up > 0.0) || !(ramp_down > 0.0) || !(ramp_startup > 0.0) || !(ramp_shutdown > 0.0))
    fail("ramp limits must be positive");
  if (min_up < 1 || min_down < 1) fail("min_up and min_down must be at least 1");
  if (!(cost_a >= 0.0)) fail("cost_a must be non-negative");
  if (!std::isfinite(cost_b) || !std::isfinite(cost_fixed)) fail("cost coefficients must be finite");
  for (std::size_t i = 0; i < suc_schedule.size(); ++i) {
    if (!(suc_schedule[i] >= 0.0)) fail("startup costs must be non-negative");
    if (i > 0 && suc_schedule[i] < suc_schedule[i - 1])
      fail("startup costs must be non-decreasing in the off duration");
  }
  if (initial.dwell_hours < 1) fail("initial dwell must be at least 1 hour");
  if (initial.on) {
    if (initial.output_mw < p_min || initial.output_mw > p_max)
      fail("initial output must lie in [p_min, p_max] when on");
  } else if (initial.output_mw != 0.0) {
    fail("initial output must be 0 when off");
  }
  std::vector<std::string> warnings;
  if (ramp_startup < p_min)
    warnings.push_back("unit '" + id + "': startup ramp below p_min, the unit can never start");
  if (ramp_shutdown < p_min)
    warnings.push_back("unit '" + id + "': shutdown ramp below p_min, the unit can never stop");
  return warnings;
}

int UnitSpec::pre_horizon_status(int t) const {
  const int first = 1 - initial.dwell_hours;
  const int on = initial.on ? 1 : 0;
  return t >= first ? on : 1 - on;
}

int UnitSpec::pre_horizon_startup(int t) const {
  return (initial.on && t == 1 - initial.dwell_hours) ? 1 : 0;
}

int UnitSpec::pre_horizon_shutdown(int t) const {
  return (!initial.on && t == 1 - initial.dwell_hours) ? 1 : 0;
}

Schedule Schedule::all_off(std::size_t horizon) {
  Schedule s;
  s.p.assign(horizon, 0.0);
  s.u.assign(horizon, 0);
  s.v.assign(horizon, 0);
  s.w.assign(horizon, 0);
  s.suc.assign(horizon, 0.0);
  return s;
}

const char* to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::kStartupCost: return "startup-cost";
    case ConstraintFamily::kOutputBounds: return "output-bounds";
    case ConstraintFamily::kRampUp: return "ramp-up";
    case ConstraintFamily::kRampDown: return "ramp-down";
    case ConstraintFamily::kMinUp: return "min-up";
    case ConstraintFamily::kMinDown: return "min-down";
    case ConstraintFamily::kLogical: return "logical";
    case ConstraintFamily::kDomain: return "domain";
  }
  return "?";
}

bool ViolationReport::has(ConstraintFamily family) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.family == family; });
}

bool ViolationReport::has(ConstraintFamily family, int hour) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.family == family && v.hour == hour; });
}

std::ostream& operator<<(std::ostream& os, const ViolationReport& report) {
  if (report.empty()) return os << "feasible";
  for (const auto& v : report.violations) {
    os << to_string(v.family) << " @ hour " << v.hour << ": " << v.lhs << " > " << v.rhs
       << " (excess " << v.excess << ")\n";
  }
  return os;
}

namespace {

void require_horizon(const Schedule& s) {
  const auto n = s.p.size();
  if (s.u.size() != n || s.v.size() != n || s.w.size() != n || s.suc.size() != n)
    throw InputError("schedule vectors have mismatched horizon lengths");
}

// Status at 0-based index j, reaching into the pre-horizon history for j < 0.
int status_at(const UnitSpec& unit, const std::vector<int>& u, long j) {
  return j >= 0 ? u[static_cast<std::size_t>(j)] : unit.pre_horizon_status(static_cast<int>(j) + 1);
}

}  // namespace

CostBreakdown generation_cost(const UnitSpec& unit, const Schedule& schedule) {
  require_horizon(schedule);
  CostBreakdown out;
  out.per_hour.resize(schedule.horizon());
  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    const double p = schedule.p[t];
    const double c = unit.cost_a * p * p + unit.cost_b * p + unit.cost_fixed * schedule.u[t] +
                     schedule.suc[t];
    out.per_hour[t] = c;
    out.total += c;
  }
  return out;
}

double required_startup_cost(const UnitSpec& unit, const std::vector<int>& u, std::size_t t) {
  double need = 0.0;
  int recent_on = 0;
  for (std::size_t tau = 1; tau <= unit.suc_schedule.size(); ++tau) {
    recent_on += status_at(unit, u, static_cast<long>(t) - static_cast<long>(tau));
    need = std::max(need, unit.suc_schedule[tau - 1] * (u[t] - recent_on));
  }
  return need;
}

ViolationReport check_feasibility(const UnitSpec& unit, const Schedule& s, double tol) {
  require_horizon(s);
  ViolationReport report;
  auto check = [&](ConstraintFamily family, std::size_t t, double lhs, double rhs) {
    if (lhs > rhs + tol)
      report.violations.push_back({family, static_cast<int>(t) + 1, lhs, rhs, lhs - rhs});
  };
  const std::size_t n = s.horizon();
  const int u0 = unit.initial.on ? 1 : 0;
  auto v_at = [&](long j) {
    return j >= 0 ? s.v[static_cast<std::size_t>(j)] : unit.pre_horizon_startup(static_cast<int>(j) + 1);
  };
  auto w_at = [&](long j) {
    return j >= 0 ? s.w[static_cast<std::size_t>(j)] : unit.pre_horizon_shutdown(static_cast<int>(j) + 1);
  };

  for (std::size_t t = 0; t < n; ++t) {
    const long jt = static_cast<long>(t);
    const bool binary = (s.u[t] == 0 || s.u[t] == 1) && (s.v[t] == 0 || s.v[t] == 1) &&
                        (s.w[t] == 0 || s.w[t] == 1);
    if (!binary) check(ConstraintFamily::kDomain, t, 1.0, 0.0);
    check(ConstraintFamily::kDomain, t, -s.p[t], 0.0);
    check(ConstraintFamily::kDomain, t, -s.suc[t], 0.0);

    int recent_on = 0;
    for (std::size_t tau = 1; tau <= unit.suc_schedule.size(); ++tau) {
      recent_on += status_at(unit, s.u, jt - static_cast<long>(tau));
      check(ConstraintFamily::kStartupCost, t, unit.suc_schedule[tau - 1] * (s.u[t] - recent_on),
            s.suc[t]);
    }

    check(ConstraintFamily::kOutputBounds, t, unit.p_min * s.u[t], s.p[t]);
    check(ConstraintFamily::kOutputBounds, t, s.p[t], unit.p_max * s.u[t]);

    const double p_prev = t > 0 ? s.p[t - 1] : unit.initial.output_mw;
    const int u_prev = t > 0 ? s.u[t - 1] : u0;
    check(ConstraintFamily::kRampUp, t, s.p[t],
          p_prev + unit.ramp_up * s.u[t] + (unit.ramp_startup - unit.ramp_up) * s.v[t]);
    check(ConstraintFamily::kRampDown, t,
          p_prev - unit.ramp_down * u_prev + (unit.ramp_down - unit.ramp_shutdown) * s.w[t], s.p[t]);

    int starts = 0;
    for (long k = jt - unit.min_up + 1; k <= jt; ++k) starts += v_at(k);
    check(ConstraintFamily::kMinUp, t, starts, s.u[t]);
    int stops = 0;
    for (long k = jt - unit.min_down + 1; k <= jt; ++k) stops += w_at(k);
    check(ConstraintFamily::kMinDown, t, stops, 1 - s.u[t]);

    const int expected_w = s.v[t] + u_prev - s.u[t];
    if (s.w[t] != expected_w)
      report.violations.push_back({ConstraintFamily::kLogical, static_cast<int>(t) + 1,
                                   static_cast<double>(s.w[t]), static_cast<double>(expected_w),
                                   std::abs(static_cast<double>(s.w[t] - expected_w))});
  }
  return report;
}

Schedule schedule_from_commitment(const UnitSpec& unit, const std::vector<int>& u,
                                  const std::vector<double>& p) {
  if (u.size() != p.size()) throw InputError("commitment and output lengths differ");
  Schedule s;
  s.p = p;
  s.u = u;
  const std::size_t n = p.size();
  s.v.assign(n, 0);
  s.w.assign(n, 0);
  s.suc.assign(n, 0.0);
  int prev = unit.initial.on ? 1 : 0;
  for (std::size_t t = 0; t < n; ++t) {
    s.v[t] = (u[t] == 1 && prev == 0) ? 1 : 0;
    s.w[t] = (u[t] == 0 && prev == 1) ? 1 : 0;
    s.suc[t] = required_startup_cost(unit, u, t);
    prev = u[t];
  }
  return s;
}

Schedule schedule_from_dispatch(const UnitSpec& unit, const std::vector<double>& p) {
  std::vector<int> u(p.size());
  for (std::size_t t = 0; t < p.size(); ++t) u[t] = p[t] > 0.0 ? 1 : 0;
  return schedule_from_commitment(unit, u, p);
}

UnitSpec calibrate_example_unit() {
  // Cost points implied by the worked example: 8768 EUR at 160 MW, and the
  // costs of 215 and 270 MW recovered from the optimal profits 1020 and 1498
  // at the configuration prices.
  constexpr double x0 = 160.0, x1 = 215.0, x2 = 270.0;
  constexpr double y0 = 8768.0;
  constexpr double y1 = 54.0 * 160.0 + 60.0 * 215.0 - 1020.0 - y0;
  constexpr double y2 = 54.0 * 160.0 + 55.0 * 215.0 + 61.0 * 270.0 - 1498.0 - y0 - y1;
  // Newton divided differences of the interpolating quadratic.
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  const double b = d01 - a * (x0 + x1);
  const double c = y0 - a * x0 * x0 - b * x0;

  UnitSpec unit;
  unit.id = "example";
  unit.p_min = 160.0;
  unit.p_max = 440.0;
  unit.ramp_startup = 160.0;
  unit.ramp_up = 55.0;
  unit.ramp_down = unit.p_max;
  unit.ramp_shutdown = unit.p_max;
  unit.min_up = 1;
  unit.min_down = 1;
  unit.cost_a = a;
  unit.cost_b = b;
  unit.cost_fixed = c;
  unit.suc_schedule = {0.0};
  unit.initial = {false, 1, 0.0};
  return unit;
}

namespace {

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = {
      "p_min", "p_max", "ramp_up", "ramp_down", "ramp_startup", "ramp_shutdown",
      "min_up", "min_down", "cost_a", "cost_b", "cost_fixed"};
  return keys;
}

bool is_known_key(const std::string& key) {
  static const std::vector<std::string> optional = {
      "id", "suc_schedule", "initial_on", "initial_dwell_hours", "initial_output_mw"};
  const auto& req = required_keys();
  return std::find(req.begin(), req.end(), key) != req.end() ||
         std::find(optional.begin(), optional.end(), key) != optional.end();
}

}  // namespace

UnitSpec read_unit(std::istream& in) {
  std::map<std::string, std::pair<std::string, std::size_t>> values;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = text::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("expected 'key = value'", line_no);
    std::string key = text::trim(line.substr(0, eq));
    std::string value = text::trim(line.substr(eq + 1));
    if (!is_known_key(key)) throw InputError("unknown key '" + key + "'", line_no);
    if (value.empty()) throw InputError("empty value for '" + key + "'", line_no);
    if (!values.emplace(key, std::make_pair(value, line_no)).second)
      throw InputError("duplicate key '" + key + "'", line_no);
  }
  for (const auto& key : required_keys())
    if (!values.count(key)) throw InputError("missing required key '" + key + "'", line_no + 1);

  auto number = [&](const std::string& key) {
    const auto& [text, line] = values.at(key);
    const auto parsed = text::parse_double(text);
    if (!parsed) throw InputError("'" + key + "' is not a number: " + text, line);
    return *parsed;
  };
  auto integer = [&](const std::string& key) {
    const auto& [text, line] = values.at(key);
    const auto parsed = text::parse_int(text);
    if (!parsed) throw InputError("'" + key + "' is not an integer: " + text, line);
    return *parsed;
  };

  UnitSpec unit;
  if (values.count("id")) unit.id = values.at("id").first;
  unit.p_min = number("p_min");
  unit.p_max = number("p_max");
  unit.ramp_up = number("ramp_up");
  unit.ramp_down = number("ramp_down");
  unit.ramp_startup = number("ramp_startup");
  unit.ramp_shutdown = number("ramp_shutdown");
  unit.min_up = integer("min_up");
  unit.min_down = integer("min_down");
  unit.cost_a = number("cost_a");
  unit.cost_b = number("cost_b");
  unit.cost_fixed = number("cost_fixed");
  if (values.count("suc_schedule")) {
    const auto& [text, line] = values.at("suc_schedule");
    for (const auto& item : text::split(text, ',')) {
      const auto parsed = text::parse_double(text::trim(item));
      if (!parsed) throw InputError("bad startup cost entry '" + item + "'", line);
      unit.suc_schedule.push_back(*parsed);
    }
  }
  if (values.count("initial_on")) {
    const auto& [text, line] = values.at("initial_on");
    if (text == "1" || text == "true") unit.initial.on = true;
    else if (text == "0" || text == "false") unit.initial.on = false;
    else throw InputError("'initial_on' must be 0/1/true/false", line);
  }
  if (values.count("initial_dwell_hours")) unit.initial.dwell_hours = integer("initial_dwell_hours");
  if (values.count("initial_output_mw")) unit.initial.output_mw = number("initial_output_mw");

  try {
    unit.validate();
  } catch (const InputError& e) {
    throw InputError(e.what(), line_no);
  }
  return unit;
}

UnitSpec read_unit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open unit file '" + path + "'");
  try {
    return read_unit(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_unit(std::ostream& out, const UnitSpec& unit) {
  using text::format_double;
  out << "id = " << unit.id << "\n"
      << "p_min = " << format_double(unit.p_min) << "\n"
      << "p_max = " << format_double(unit.p_max) << "\n"
      << "ramp_up = " << format_double(unit.ramp_up) << "\n"
      << "ramp_down = " << format_double(unit.ramp_down) << "\n"
      << "ramp_startup = " << format_double(unit.ramp_startup) << "\n"
      << "ramp_shutdown = " << format_double(unit.ramp_shutdown) << "\n"
      << "min_up = " << unit.min_up << "\n"
      << "min_down = " << unit.min_down << "\n"
      << "cost_a = " << format_double(unit.cost_a) << "\n"
      << "cost_b = " << format_double(unit.cost_b) << "\n"
      << "cost_fixed = " << format_double(unit.cost_fixed) << "\n";
  if (!unit.suc_schedule.empty()) {
    out << "suc_schedule = ";
    for (std::size_t i = 0; i < unit.suc_schedule.size(); ++i)
      out << (i ? ", " : "") << format_double(unit.suc_schedule[i]);
    out << "\n";
  }
  out << "initial_on = " << (unit.initial.on ? 1 : 0) << "\n"
      << "initial_dwell_hours = " << unit.initial.dwell_hours << "\n"
      << "initial_output_mw = " << format_double(unit.initial.output_mw) << "\n";
}

}  // namespace offering
