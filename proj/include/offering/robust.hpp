#pragma once

#include <vector>

#include "offering/units.hpp"

namespace offering {

/// Nominal prices, non-negative downward deviations and the number of hours
/// Gamma whose prices may deviate at the same time.
struct UncertaintyModel {
  std::vector<double> nominal;    // EUR/MWh
  std::vector<double> deviation;  // EUR/MWh, >= 0
  int budget = 0;                 // 0..horizon

  std::size_t horizon() const { return nominal.size(); }
  void validate() const;  // throws InputError
  bool degenerate() const;  // budget 0 or all deviations 0
};

enum class Flavor {
  kNominal,          // max sum lambda p - c(p)
  kDualizedRobust,   // max sum lambda p - c(p) - Gamma z - sum q, z + q_t >= d_t p_t
  kWorstCase,        // max sum (lambda - d) p - c(p), only for Gamma = |T|
};

const char* to_string(Flavor flavor);

/// One solvable single-unit offering instance.
struct RobustProblem {
  UnitSpec unit;
  UncertaintyModel model;
  Flavor flavor = Flavor::kNominal;
  /// Formulation variant for the dualized flavor: adds y_t >= p_t and uses
  /// z + q_t >= d_t y_t instead of d_t p_t. Same optimum, larger model.
  bool explicit_output_copies = false;

  std::size_t horizon() const { return model.horizon(); }

  /// Price coefficients entering the profit term of the objective.
  std::vector<double> objective_prices() const;
  /// Objective value of a schedule: profit under objective_prices(), minus the
  /// worst-case deviation loss for the dualized flavor.
  double evaluate(const Schedule& schedule) const;
};

RobustProblem build_nominal(const UnitSpec& unit, const std::vector<double>& prices);
RobustProblem build_robust(const UnitSpec& unit, const UncertaintyModel& model);
RobustProblem worst_case_equivalent(const UnitSpec& unit, const UncertaintyModel& model);

struct DeviationResult {
  double value = 0.0;
  /// Hours (0-based) that deviate, in decreasing order of d_t p_t.
  std::vector<std::size_t> hours;
};

/// Sum of the Gamma largest d_t p_t. Ties favour the lower hour index.
DeviationResult eval_dev(const std::vector<double>& d, const std::vector<double>& p, int budget);

struct DualDeviationResult {
  double value = 0.0;
  double z = 0.0;
  std::vector<double> q;
};

/// Solves min Gamma z + sum q_t s.t. z + q_t >= d_t p_t, z, q >= 0 exactly by
/// scanning z over the breakpoints {0} U {d_t p_t}.
DualDeviationResult eval_dev_dual(const std::vector<double>& d, const std::vector<double>& p,
                                  int budget);

}  // namespace offering
