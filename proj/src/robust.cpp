#include "offering/robust.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace offering {

void UncertaintyModel::validate() const {
  if (deviation.size() != nominal.size())
    throw InputError("nominal prices and deviations have different lengths");
  if (budget < 0 || static_cast<std::size_t>(budget) > horizon())
    throw InputError("budget " + std::to_string(budget) + " outside 0.." +
                     std::to_string(horizon()));
  for (std::size_t t = 0; t < horizon(); ++t) {
    if (!std::isfinite(nominal[t])) throw InputError("non-finite nominal price");
    if (!(deviation[t] >= 0.0)) throw InputError("deviation must be non-negative");
  }
}

bool UncertaintyModel::degenerate() const {
  return budget == 0 ||
         std::all_of(deviation.begin(), deviation.end(), [](double d) { return d == 0.0; });
}

const char* to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::kNominal: return "nominal";
    case Flavor::kDualizedRobust: return "robust";
    case Flavor::kWorstCase: return "worst-case";
  }
  return "?";
}

std::vector<double> RobustProblem::objective_prices() const {
  std::vector<double> prices = model.nominal;
  if (flavor == Flavor::kWorstCase)
    for (std::size_t t = 0; t < prices.size(); ++t) prices[t] -= model.deviation[t];
  return prices;
}

double RobustProblem::evaluate(const Schedule& schedule) const {
  if (schedule.horizon() != horizon()) throw InputError("schedule horizon does not match problem");
  const auto prices = objective_prices();
  double revenue = 0.0;
  for (std::size_t t = 0; t < horizon(); ++t) revenue += prices[t] * schedule.p[t];
  double value = revenue - generation_cost(unit, schedule).total;
  if (flavor == Flavor::kDualizedRobust)
    value -= eval_dev(model.deviation, schedule.p, model.budget).value;
  return value;
}

RobustProblem build_nominal(const UnitSpec& unit, const std::vector<double>& prices) {
  if (prices.empty()) throw InputError("empty price vector");
  for (double x : prices)
    if (!(x >= 0.0)) throw InputError("nominal prices must be non-negative");
  RobustProblem problem;
  problem.unit = unit;
  problem.model.nominal = prices;
  problem.model.deviation.assign(prices.size(), 0.0);
  problem.model.budget = 0;
  problem.flavor = Flavor::kNominal;
  unit.validate();
  return problem;
}

RobustProblem build_robust(const UnitSpec& unit, const UncertaintyModel& model) {
  if (model.nominal.empty()) throw InputError("empty price vector");
  model.validate();
  unit.validate();
  RobustProblem problem;
  problem.unit = unit;
  problem.model = model;
  problem.flavor = Flavor::kDualizedRobust;
  return problem;
}

RobustProblem worst_case_equivalent(const UnitSpec& unit, const UncertaintyModel& model) {
  if (model.nominal.empty()) throw InputError("empty price vector");
  model.validate();
  if (static_cast<std::size_t>(model.budget) != model.horizon())
    throw InputError("worst-case counterpart requires the full budget " +
                     std::to_string(model.horizon()) + ", got " + std::to_string(model.budget));
  unit.validate();
  RobustProblem problem;
  problem.unit = unit;
  problem.model = model;
  problem.flavor = Flavor::kWorstCase;
  return problem;
}

namespace {

void check_deviation_args(const std::vector<double>& d, const std::vector<double>& p, int budget) {
  if (d.size() != p.size()) throw InputError("deviation and output vectors differ in length");
  if (budget < 0 || static_cast<std::size_t>(budget) > d.size())
    throw InputError("budget " + std::to_string(budget) + " outside 0.." + std::to_string(d.size()));
}

// Hour indices ordered by decreasing d_t p_t, lower index first on ties.
std::vector<std::size_t> order_by_loss(const std::vector<double>& loss) {
  std::vector<std::size_t> order(loss.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return loss[a] > loss[b]; });
  return order;
}

}  // namespace

DeviationResult eval_dev(const std::vector<double>& d, const std::vector<double>& p, int budget) {
  check_deviation_args(d, p, budget);
  std::vector<double> loss(d.size());
  for (std::size_t t = 0; t < d.size(); ++t) loss[t] = d[t] * p[t];
  const auto order = order_by_loss(loss);
  DeviationResult out;
  for (int k = 0; k < budget; ++k) {
    out.hours.push_back(order[static_cast<std::size_t>(k)]);
    out.value += loss[order[static_cast<std::size_t>(k)]];
  }
  return out;
}

DualDeviationResult eval_dev_dual(const std::vector<double>& d, const std::vector<double>& p,
                                  int budget) {
  check_deviation_args(d, p, budget);
  const std::size_t n = d.size();
  std::vector<double> loss(n);
  for (std::size_t t = 0; t < n; ++t) loss[t] = d[t] * p[t];
  std::vector<double> sorted = loss;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  double best_z = 0.0;
  double best_value = total;  // z = 0, q_t = d_t p_t
  if (static_cast<std::size_t>(budget) < n) {
    // Breakpoint z = k-th largest loss: Gamma z + sum of the k-1 larger losses minus (k-1) z.
    // Scanning from the largest keeps the largest minimiser.
    double prefix = 0.0;
    best_value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= n; ++k) {
      const double z = sorted[k - 1];
      const double value = budget * z + prefix - static_cast<double>(k - 1) * z;
      if (value < best_value - 1e-12 * std::max(1.0, std::abs(value))) {
        best_value = value;
        best_z = z;
      }
      prefix += sorted[k - 1];
    }
    if (total < best_value - 1e-12 * std::max(1.0, std::abs(total))) {
      best_value = total;
      best_z = 0.0;
    }
  }
  DualDeviationResult out;
  out.z = best_z;
  out.q.resize(n);
  double value = budget * best_z;
  for (std::size_t t = 0; t < n; ++t) {
    out.q[t] = std::max(0.0, loss[t] - best_z);
    value += out.q[t];
  }
  out.value = value;
  return out;
}

}  // namespace offering
