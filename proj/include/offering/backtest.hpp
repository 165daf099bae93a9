#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "offering/gamma_offering.hpp"

namespace offering {

struct ProfitRecord {
  std::string unit_id;
  int trim = 0;     // J
  int budget = 0;   // Gamma
  int window = 0;   // 1-based
  double profit = 0.0;  // EUR over the evaluation week
  std::vector<double> daily;  // EUR per evaluation day
  ZeroPriceOffer offer;       // the offer that was priced
};

/// Profit of applying the offer on each realized day. Every day is settled
/// independently: the unit starts from its initial state, so the solved
/// schedule's startup charges recur daily.
ProfitRecord evaluate_offer(const UnitSpec& unit, const ZeroPriceOffer& offer,
                            const std::vector<std::array<double, kHoursPerDay>>& days);

struct FailedCell {
  std::string unit_id;
  int trim = 0;
  int budget = 0;
  int window = 0;
  std::string reason;
};

/// Yearly comparison for one (unit, J).
struct YearSummary {
  std::string unit_id;
  int trim = 0;
  double percent_excluded = 0.0;   // 100 J / I
  std::map<int, double> yearly;    // Gamma -> EUR, over windows without failures
  int best_budget = 0;             // smallest Gamma attaining the maximum
  std::optional<double> delta_vs_zero, percent_vs_zero;  // when Gamma = 0 was run
  std::optional<double> delta_vs_full, percent_vs_full;  // when Gamma = 24 was run
};

struct BacktestReport {
  std::vector<ProfitRecord> records;  // ordered by unit, J, Gamma, window
  std::vector<FailedCell> failures;
  std::vector<YearSummary> summaries;  // ordered by unit, J
  int observations = 0;                // I, training days per hour
};

struct BacktestConfig {
  std::vector<int> trims{0, 2, 4};
  std::vector<int> budgets;  // empty means 0..24
  std::string zone;          // empty means the series' first zone
  int year = 0;              // 0 means the year of the first record
  int windows = 24;
  int jobs = 1;
  SolverConfig solver;
};

BacktestReport backtest_run(const std::vector<UnitSpec>& units, const PriceSeries& series,
                            const BacktestConfig& config);

/// Rebuilds summaries from records (failed cells excluded).
std::vector<YearSummary> summarize(const std::vector<ProfitRecord>& records,
                                   const std::vector<FailedCell>& failures, int observations);

std::string format_report_csv(const BacktestReport& report);
std::string format_report_table(const BacktestReport& report);
void write_records(std::ostream& out, const std::vector<ProfitRecord>& records);

}  // namespace offering
