#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "offering/miqp.hpp"

namespace offering {

/// Price ladder of the curve-building method: iteration k (1-based) plans
/// against price_max - (k-1) * shortfall * (price_max - price_min).
struct BarConConfig {
  std::vector<double> price_min;  // EUR/MWh per hour
  std::vector<double> price_max;  // EUR/MWh per hour
  double shortfall = 0.0;         // in [0, 1]
  int iterations = 1;             // K

  void validate() const;  // throws InputError
  std::vector<double> ladder(int k) const;
};

struct CurveStep {
  double quantity = 0.0;  // MW
  double price = 0.0;     // EUR/MWh
};

/// Per hour, steps with strictly increasing prices and non-decreasing quantities.
struct OfferingCurve {
  std::vector<std::vector<CurveStep>> hours;
  /// Repairs applied while merging and practical-limit remarks.
  std::vector<std::string> diagnostics;

  std::size_t horizon() const { return hours.size(); }
  /// Empty when the step invariants hold; otherwise one message per problem.
  std::vector<std::string> check(double p_max) const;
};

/// Merges per-iteration (price, quantity) vectors into curves: steps sorted
/// by price, decreasing quantities lifted to the running maximum, equal
/// prices collapsed to their largest quantity. `step_limit` > 0 adds a
/// diagnostic for hours with more steps than the market accepts.
OfferingCurve merge_curves(const std::vector<std::vector<double>>& prices,
                           const std::vector<std::vector<double>>& quantities, int step_limit = 4);

struct BarConRun {
  std::vector<std::vector<double>> prices;  // per iteration
  std::vector<SolveResult> solves;          // per iteration
  OfferingCurve curve;
};

/// Solves the K full-protection problems and merges their outputs. With
/// `dualized` the problems go through the dualized model at full budget
/// instead of the shifted-price shortcut.
BarConRun barcon_run(const UnitSpec& unit, const BarConConfig& config,
                     const SolverConfig& solver = {}, bool dualized = false);

/// Per hour, the quantity of the highest-priced step at or below the realized price.
std::vector<double> simulate_acceptance(const OfferingCurve& curve,
                                        const std::vector<double>& realized);

enum class FindingKind { kRampInfeasible, kInfeasible, kSuboptimal };
const char* to_string(FindingKind kind);

struct AuditFinding {
  std::vector<double> realized;
  std::vector<double> accepted;
  FindingKind kind = FindingKind::kSuboptimal;
  double achieved_profit = 0.0;  // EUR, revenue minus cost of the accepted dispatch
  double ex_post_profit = 0.0;   // EUR, optimum with the realized prices known
  ViolationReport violations;
  Schedule ex_post_schedule;
};

/// Profit of an output vector at given prices, with commitment and startup
/// charges completed by schedule_from_dispatch.
double dispatch_profit(const UnitSpec& unit, const std::vector<double>& prices,
                       const std::vector<double>& p);

std::vector<AuditFinding> audit_curves(const UnitSpec& unit, const OfferingCurve& curve,
                                       const std::vector<std::vector<double>>& scenarios,
                                       const SolverConfig& solver = {});

std::ostream& operator<<(std::ostream& os, const AuditFinding& finding);

/// `hour,step,quantity_mw,price_eur_mwh`, hours and steps 1-based.
void write_curve(std::ostream& out, const OfferingCurve& curve);
OfferingCurve read_curve(std::istream& in);

/// Configuration reproducing the three-hour worked example: highest prices
/// (54, 55, 61), one-euro ladder steps, three iterations.
BarConConfig example_barcon_config();
/// Realized-price scenarios of the worked example's audit.
std::vector<std::vector<double>> example_scenarios();

}  // namespace offering
