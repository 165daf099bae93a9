#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace offering {

/// Input that cannot be accepted (bad file contents, out-of-range arguments).
/// `line()` is 0 when the error is not tied to a text line.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct InitialState {
  bool on = false;
  /// Consecutive hours already spent in the current state before hour 1.
  int dwell_hours = 1;
  /// Output in the hour before the horizon, MW. Zero when off.
  double output_mw = 0.0;
};

/// Technical and cost data of one thermal unit.
///
/// Generation cost in an on-hour is cost_a*p^2 + cost_b*p + cost_fixed, plus
/// the startup charge suc_schedule[tau-1] when the unit starts after tau off
/// hours (the last entry applies to any longer off period).
struct UnitSpec {
  std::string id = "unit";
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double ramp_startup = 0.0;
  double ramp_shutdown = 0.0;
  int min_up = 1;
  int min_down = 1;
  double cost_a = 0.0;
  double cost_b = 0.0;
  double cost_fixed = 0.0;
  std::vector<double> suc_schedule;
  InitialState initial;

  /// Throws InputError on a violated invariant; returns non-fatal warnings.
  std::vector<std::string> validate() const;

  /// Status u_t for t <= 0 (t = 0 is the hour before the horizon).
  int pre_horizon_status(int t) const;
  /// Startup indicator for t <= 0, consistent with pre_horizon_status.
  int pre_horizon_startup(int t) const;
  /// Shutdown indicator for t <= 0, consistent with pre_horizon_status.
  int pre_horizon_shutdown(int t) const;

  /// Hourly cost of producing p MW while on, excluding startup charges.
  double running_cost(double p) const { return (cost_a * p + cost_b) * p + cost_fixed; }
};

/// Hourly decisions of one unit. Index 0 is hour 1.
struct Schedule {
  std::vector<double> p;
  std::vector<int> u;
  std::vector<int> v;
  std::vector<int> w;
  std::vector<double> suc;

  std::size_t horizon() const { return p.size(); }
  static Schedule all_off(std::size_t horizon);
};

enum class ConstraintFamily {
  kStartupCost,
  kOutputBounds,
  kRampUp,
  kRampDown,
  kMinUp,
  kMinDown,
  kLogical,
  kDomain,
};

const char* to_string(ConstraintFamily family);

struct Violation {
  ConstraintFamily family;
  int hour;  // 1-based
  double lhs;
  double rhs;
  /// Amount by which lhs exceeds rhs (always positive for a reported entry).
  double excess;
};

struct ViolationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  bool has(ConstraintFamily family) const;
  bool has(ConstraintFamily family, int hour) const;
};

std::ostream& operator<<(std::ostream& os, const ViolationReport& report);

struct CostBreakdown {
  double total = 0.0;
  std::vector<double> per_hour;
};

/// a p^2 + b p + c^F u + suc summed over the horizon.
CostBreakdown generation_cost(const UnitSpec& unit, const Schedule& schedule);

/// Checks every constraint of the feasible set; `tol` is absolute (MW, EUR).
ViolationReport check_feasibility(const UnitSpec& unit, const Schedule& schedule,
                                  double tol = 1e-6);

/// Smallest startup charge compatible with the commitment in `u` at hour t (0-based).
double required_startup_cost(const UnitSpec& unit, const std::vector<int>& u, std::size_t t);

/// Completes an output vector into a Schedule: u_t = [p_t > 0], v/w from the
/// status transitions, suc at its smallest admissible value.
Schedule schedule_from_dispatch(const UnitSpec& unit, const std::vector<double>& p);

/// Completes a commitment and output pair (u may be on with p = 0 when p_min = 0).
Schedule schedule_from_commitment(const UnitSpec& unit, const std::vector<int>& u,
                                  const std::vector<double>& p);

/// The 440 MW unit of the three-hour worked example: cold start, startup ramp
/// 160 MW/h, ramp-up 55 MW/h, quadratic cost through the three cost points
/// that the example's optimal profits imply.
UnitSpec calibrate_example_unit();

/// Key-value text format, one `key = value` per line, `#` comments.
UnitSpec read_unit(std::istream& in);
UnitSpec read_unit_file(const std::string& path);
void write_unit(std::ostream& out, const UnitSpec& unit);

}  // namespace offering
