#include "offering/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include "offering/text_util.hpp"

namespace offering {

ProfitRecord evaluate_offer(const UnitSpec& unit, const ZeroPriceOffer& offer,
                            const std::vector<std::array<double, kHoursPerDay>>& days) {
  if (offer.quantity.size() != kHoursPerDay || offer.schedule.horizon() != kHoursPerDay)
    throw InputError("offer must cover 24 hours");
  if (days.empty()) throw InputError("no realized prices to evaluate against");
  const double cost = generation_cost(unit, offer.schedule).total;
  ProfitRecord record;
  record.unit_id = offer.unit_id;
  record.trim = offer.trim;
  record.budget = offer.budget;
  record.window = offer.window;
  record.offer = offer;
  for (const auto& prices : days) {
    double revenue = 0.0;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) revenue += prices[t] * offer.quantity[t];
    record.daily.push_back(revenue - cost);
    record.profit += revenue - cost;
  }
  return record;
}

namespace {

struct Cell {
  std::size_t unit;
  std::size_t trim;
  int budget;
  std::size_t window;
};

using CellOutcome = std::variant<ProfitRecord, FailedCell>;

std::string pct(const std::optional<double>& x) {
  return x ? text::format_fixed(*x, 2) : std::string("n/a");
}

std::string eur(const std::optional<double>& x) {
  return x ? text::format_fixed(*x, 2) : std::string("n/a");
}

std::optional<double> yearly_at(const YearSummary& s, int budget) {
  const auto it = s.yearly.find(budget);
  if (it == s.yearly.end()) return std::nullopt;
  return it->second;
}

}  // namespace

BacktestReport backtest_run(const std::vector<UnitSpec>& units, const PriceSeries& series,
                            const BacktestConfig& config) {
  if (series.size() == 0) throw InputError("empty price series");
  const std::string zone = config.zone.empty() ? series.zones().front() : config.zone;
  const int year = config.year != 0 ? config.year
                                    : static_cast<int>(series.records().front().date.year());
  const auto windows = make_windows(series, zone, year, config.windows);
  std::vector<int> budgets = config.budgets;
  if (budgets.empty())
    for (int g = 0; g <= kHoursPerDay; ++g) budgets.push_back(g);

  BacktestReport report;
  report.observations = static_cast<int>(windows.front().training.size());
  for (int j : config.trims)
    if (j < 0 || j >= report.observations)
      throw InputError("trim count " + std::to_string(j) + " outside 0.." +
                       std::to_string(report.observations - 1));

  // Statistics depend on (J, window) only.
  std::vector<std::vector<PriceStats>> stats(config.trims.size());
  std::vector<std::vector<std::array<double, kHoursPerDay>>> realized(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w)
    for (const auto& d : windows[w].evaluation) realized[w].push_back(series.day(zone, d));
  for (std::size_t j = 0; j < config.trims.size(); ++j)
    for (const auto& window : windows)
      stats[j].push_back(trim_stats(series, zone, window.training, config.trims[j]));

  std::vector<Cell> cells;
  for (std::size_t u = 0; u < units.size(); ++u)
    for (std::size_t j = 0; j < config.trims.size(); ++j)
      for (int g : budgets)
        for (std::size_t w = 0; w < windows.size(); ++w) cells.push_back({u, j, g, w});

  std::vector<CellOutcome> outcomes(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell& c = cells[i];
    const UnitSpec& unit = units[c.unit];
    const int window = windows[c.window].index;
    FailedCell failed{unit.id, config.trims[c.trim], c.budget, window, ""};
    try {
      const OfferingRun run =
          gamma_offering_run(unit, stats[c.trim][c.window], c.budget, config.solver, window);
      if (run.result.status != SolveStatus::kOptimal) {
        failed.reason = std::string("solver status ") + to_string(run.result.status);
        outcomes[i] = failed;
        return;
      }
      outcomes[i] = evaluate_offer(unit, run.offer, realized[c.window]);
    } catch (const std::exception& e) {
      failed.reason = e.what();
      outcomes[i] = failed;
    }
  };

  int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, std::max<int>(1, static_cast<int>(cells.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& outcome : outcomes) {
    if (auto* r = std::get_if<ProfitRecord>(&outcome)) report.records.push_back(std::move(*r));
    else report.failures.push_back(std::get<FailedCell>(outcome));
  }
  report.summaries = summarize(report.records, report.failures, report.observations);
  return report;
}

std::vector<YearSummary> summarize(const std::vector<ProfitRecord>& records,
                                   const std::vector<FailedCell>& failures, int observations) {
  std::vector<YearSummary> out;
  auto find = [&](const std::string& unit, int trim) -> YearSummary& {
    for (auto& s : out)
      if (s.unit_id == unit && s.trim == trim) return s;
    YearSummary s;
    s.unit_id = unit;
    s.trim = trim;
    s.percent_excluded = observations > 0 ? 100.0 * trim / observations : 0.0;
    out.push_back(std::move(s));
    return out.back();
  };
  for (const auto& r : records) find(r.unit_id, r.trim).yearly[r.budget] += r.profit;
  for (const auto& f : failures) find(f.unit_id, f.trim);

  for (auto& s : out) {
    if (s.yearly.empty()) continue;
    const auto best = std::max_element(
        s.yearly.begin(), s.yearly.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    s.best_budget = best->first;
    auto compare = [&](int baseline, std::optional<double>& delta, std::optional<double>& percent) {
      const auto base = yearly_at(s, baseline);
      if (!base) return;
      delta = best->second - *base;
      if (*base != 0.0) percent = 100.0 * *delta / std::abs(*base);
    };
    compare(0, s.delta_vs_zero, s.percent_vs_zero);
    compare(kHoursPerDay, s.delta_vs_full, s.percent_vs_full);
  }
  return out;
}

std::string format_report_csv(const BacktestReport& report) {
  std::ostringstream os;
  os << "unit,trim,percent_excluded,best_budget,profit_best_eur,profit_gamma0_eur,"
        "profit_gamma24_eur,delta_vs_gamma0_eur,delta_vs_gamma0_pct,delta_vs_gamma24_eur,"
        "delta_vs_gamma24_pct\n";
  for (const auto& s : report.summaries) {
    os << s.unit_id << ',' << s.trim << ',' << text::format_fixed(s.percent_excluded, 1) << ','
       << s.best_budget << ',' << eur(yearly_at(s, s.best_budget)) << ',' << eur(yearly_at(s, 0))
       << ',' << eur(yearly_at(s, kHoursPerDay)) << ',' << eur(s.delta_vs_zero) << ','
       << pct(s.percent_vs_zero) << ',' << eur(s.delta_vs_full) << ',' << pct(s.percent_vs_full)
       << '\n';
  }
  return os.str();
}

std::string format_report_table(const BacktestReport& report) {
  const std::vector<std::string> head{"unit", "%Ex", "G_best", "profit(G_best)", "dP vs G0",
                                      "dP% vs G0", "dP vs G24", "dP% vs G24"};
  std::vector<std::vector<std::string>> rows{head};
  for (const auto& s : report.summaries)
    rows.push_back({s.unit_id, text::format_fixed(s.percent_excluded, 1),
                    std::to_string(s.best_budget), eur(yearly_at(s, s.best_budget)),
                    eur(s.delta_vs_zero), pct(s.percent_vs_zero), eur(s.delta_vs_full),
                    pct(s.percent_vs_full)});
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << "  ";
      if (c == 0) os << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      else os << std::right << std::setw(static_cast<int>(width[c])) << row[c];
    }
    os << '\n';
  }
  if (!report.failures.empty()) {
    os << "\n" << report.failures.size()
       << " failed cell(s), excluded from the yearly sums of their budget:\n";
    for (const auto& f : report.failures)
      os << "  " << f.unit_id << " J=" << f.trim << " G=" << f.budget << " W=" << f.window << ": "
         << f.reason << '\n';
  }
  return os.str();
}

void write_records(std::ostream& out, const std::vector<ProfitRecord>& records) {
  out << "unit,trim,budget,window,profit_eur\n";
  for (const auto& r : records)
    out << r.unit_id << ',' << r.trim << ',' << r.budget << ',' << r.window << ','
        << text::format_double(r.profit) << '\n';
}

}  // namespace offering
