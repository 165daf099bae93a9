#include "offering/barcon.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "offering/text_util.hpp"

namespace offering {

namespace {
constexpr double kPriceTol = 1e-9;
}

void BarConConfig::validate() const {
  if (price_min.empty() || price_min.size() != price_max.size())
    throw InputError("price_min and price_max must be non-empty and of equal length");
  for (std::size_t t = 0; t < price_min.size(); ++t)
    if (!(price_min[t] <= price_max[t]))
      throw InputError("price_min exceeds price_max in hour " + std::to_string(t + 1));
  if (!(shortfall >= 0.0 && shortfall <= 1.0)) throw InputError("shortfall must lie in [0, 1]");
  if (iterations < 1) throw InputError("at least one iteration is required");
  if ((iterations - 1) * shortfall > 1.0 + 1e-12)
    throw InputError("ladder leaves the price range: (K-1) * shortfall > 1");
}

std::vector<double> BarConConfig::ladder(int k) const {
  std::vector<double> out(price_max.size());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = price_max[t] - (k - 1) * shortfall * (price_max[t] - price_min[t]);
  return out;
}

std::vector<std::string> OfferingCurve::check(double p_max) const {
  std::vector<std::string> problems;
  for (std::size_t t = 0; t < hours.size(); ++t) {
    const auto& steps = hours[t];
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const std::string where = "hour " + std::to_string(t + 1) + " step " + std::to_string(s + 1);
      if (steps[s].quantity < 0.0 || steps[s].quantity > p_max + 1e-9)
        problems.push_back(where + ": quantity outside [0, p_max]");
      if (s == 0) continue;
      if (!(steps[s].price > steps[s - 1].price)) problems.push_back(where + ": price not increasing");
      if (steps[s].quantity < steps[s - 1].quantity) problems.push_back(where + ": quantity decreases");
    }
  }
  return problems;
}

OfferingCurve merge_curves(const std::vector<std::vector<double>>& prices,
                           const std::vector<std::vector<double>>& quantities, int step_limit) {
  if (prices.size() != quantities.size() || prices.empty())
    throw InputError("need one price and one quantity vector per iteration");
  const std::size_t n = prices.front().size();
  for (std::size_t k = 0; k < prices.size(); ++k)
    if (prices[k].size() != n || quantities[k].size() != n)
      throw InputError("iteration vectors differ in length");

  OfferingCurve curve;
  curve.hours.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<CurveStep> raw;
    for (std::size_t k = 0; k < prices.size(); ++k) raw.push_back({quantities[k][t], prices[k][t]});
    std::stable_sort(raw.begin(), raw.end(),
                     [](const CurveStep& a, const CurveStep& b) { return a.price < b.price; });
    auto& steps = curve.hours[t];
    for (const auto& step : raw) {
      if (!steps.empty() && step.price - steps.back().price <= kPriceTol) {
        if (step.quantity != steps.back().quantity)
          curve.diagnostics.push_back("hour " + std::to_string(t + 1) + ": equal prices " +
                                      text::format_double(step.price) +
                                      " collapsed to the larger quantity");
        steps.back().quantity = std::max(steps.back().quantity, step.quantity);
      } else {
        steps.push_back(step);
      }
    }
    double running = 0.0;
    for (auto& step : steps) {
      if (step.quantity < running) {
        curve.diagnostics.push_back("hour " + std::to_string(t + 1) + ": quantity at price " +
                                    text::format_double(step.price) + " lifted from " +
                                    text::format_double(step.quantity) + " to " +
                                    text::format_double(running) + " MW");
        step.quantity = running;
      }
      running = step.quantity;
    }
    if (step_limit > 0 && steps.size() > static_cast<std::size_t>(step_limit))
      curve.diagnostics.push_back("hour " + std::to_string(t + 1) + ": " +
                                  std::to_string(steps.size()) + " steps exceed the limit of " +
                                  std::to_string(step_limit));
  }
  return curve;
}

BarConRun barcon_run(const UnitSpec& unit, const BarConConfig& config, const SolverConfig& solver,
                     bool dualized) {
  config.validate();
  BarConRun run;
  std::vector<std::vector<double>> quantities;
  for (int k = 1; k <= config.iterations; ++k) {
    UncertaintyModel model;
    model.nominal = config.price_max;
    model.deviation.resize(config.price_max.size());
    for (std::size_t t = 0; t < model.deviation.size(); ++t)
      model.deviation[t] = (k - 1) * config.shortfall * (config.price_max[t] - config.price_min[t]);
    model.budget = static_cast<int>(model.horizon());
    const RobustProblem problem =
        dualized ? build_robust(unit, model) : worst_case_equivalent(unit, model);
    SolveResult result = solve(problem, solver);
    if (result.status == SolveStatus::kInfeasible)
      throw SolverError("iteration " + std::to_string(k) + " is infeasible");
    run.prices.push_back(config.ladder(k));
    quantities.push_back(result.schedule.p);
    run.solves.push_back(std::move(result));
  }
  run.curve = merge_curves(run.prices, quantities);
  return run;
}

std::vector<double> simulate_acceptance(const OfferingCurve& curve,
                                        const std::vector<double>& realized) {
  if (realized.size() != curve.horizon())
    throw InputError("realized prices do not match the curve horizon");
  std::vector<double> accepted(curve.horizon(), 0.0);
  for (std::size_t t = 0; t < curve.horizon(); ++t)
    for (const auto& step : curve.hours[t])
      if (step.price <= realized[t] + kPriceTol) accepted[t] = step.quantity;
  return accepted;
}

const char* to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::kRampInfeasible: return "ramp-infeasible";
    case FindingKind::kInfeasible: return "infeasible";
    case FindingKind::kSuboptimal: return "suboptimal";
  }
  return "?";
}

double dispatch_profit(const UnitSpec& unit, const std::vector<double>& prices,
                       const std::vector<double>& p) {
  if (prices.size() != p.size()) throw InputError("price and output vectors differ in length");
  const Schedule schedule = schedule_from_dispatch(unit, p);
  double revenue = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) revenue += prices[t] * p[t];
  return revenue - generation_cost(unit, schedule).total;
}

std::vector<AuditFinding> audit_curves(const UnitSpec& unit, const OfferingCurve& curve,
                                       const std::vector<std::vector<double>>& scenarios,
                                       const SolverConfig& solver) {
  std::vector<AuditFinding> findings;
  for (const auto& realized : scenarios) {
    AuditFinding f;
    f.realized = realized;
    f.accepted = simulate_acceptance(curve, realized);
    f.violations = check_feasibility(unit, schedule_from_dispatch(unit, f.accepted),
                                     solver.feasibility_tolerance);
    f.achieved_profit = dispatch_profit(unit, realized, f.accepted);
    const SolveResult best = solve(build_nominal(unit, realized), solver);
    f.ex_post_profit = best.objective;
    f.ex_post_schedule = best.schedule;
    if (!f.violations.empty()) {
      const bool ramp = f.violations.has(ConstraintFamily::kRampUp) ||
                        f.violations.has(ConstraintFamily::kRampDown);
      f.kind = ramp ? FindingKind::kRampInfeasible : FindingKind::kInfeasible;
      findings.push_back(std::move(f));
    } else if (f.achieved_profit <
               f.ex_post_profit - solver.allowed_gap(f.ex_post_profit)) {
      f.kind = FindingKind::kSuboptimal;
      findings.push_back(std::move(f));
    }
  }
  return findings;
}

namespace {
std::string join(const std::vector<double>& xs) {
  std::string s = "(";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + text::format_double(xs[i]);
  return s + ")";
}
}  // namespace

std::ostream& operator<<(std::ostream& os, const AuditFinding& f) {
  os << to_string(f.kind) << ": realized " << join(f.realized) << ", accepted " << join(f.accepted)
     << ", achieved profit " << text::format_fixed(f.achieved_profit, 2) << " EUR, ex-post optimum "
     << text::format_fixed(f.ex_post_profit, 2) << " EUR at " << join(f.ex_post_schedule.p);
  if (!f.violations.empty()) os << "\n" << f.violations;
  return os;
}

void write_curve(std::ostream& out, const OfferingCurve& curve) {
  out << "hour,step,quantity_mw,price_eur_mwh\n";
  for (std::size_t t = 0; t < curve.horizon(); ++t)
    for (std::size_t s = 0; s < curve.hours[t].size(); ++s)
      out << t + 1 << ',' << s + 1 << ',' << text::format_double(curve.hours[t][s].quantity) << ','
          << text::format_double(curve.hours[t][s].price) << '\n';
}

OfferingCurve read_curve(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || text::trim(line) != "hour,step,quantity_mw,price_eur_mwh")
    throw InputError("expected header 'hour,step,quantity_mw,price_eur_mwh'", line_no);
  OfferingCurve curve;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw InputError("expected 4 comma-separated fields", line_no);
    const auto hour = text::parse_int(text::trim(fields[0]));
    const auto step = text::parse_int(text::trim(fields[1]));
    const auto quantity = text::parse_double(text::trim(fields[2]));
    const auto price = text::parse_double(text::trim(fields[3]));
    if (!hour || !step || !quantity || !price) throw InputError("malformed curve row", line_no);
    if (*hour < 1 || static_cast<std::size_t>(*hour) > curve.horizon() + 1)
      throw InputError("hours must appear in order starting at 1", line_no);
    if (static_cast<std::size_t>(*hour) == curve.horizon() + 1) curve.hours.emplace_back();
    auto& steps = curve.hours[static_cast<std::size_t>(*hour - 1)];
    if (static_cast<std::size_t>(*step) != steps.size() + 1)
      throw InputError("steps must appear in order starting at 1", line_no);
    steps.push_back({*quantity, *price});
  }
  return curve;
}

BarConConfig example_barcon_config() {
  BarConConfig c;
  c.price_max = {54, 55, 61};
  c.price_min = {52, 53, 59};
  c.shortfall = 0.5;
  c.iterations = 3;
  return c;
}

std::vector<std::vector<double>> example_scenarios() {
  return {{54, 55, 61}, {52, 53, 61}, {54, 53, 59}};
}

}  // namespace offering
