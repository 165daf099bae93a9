#include "offering/gamma_offering.hpp"

#include <ostream>

#include "offering/text_util.hpp"

namespace offering {

OfferingRun gamma_offering_run(const UnitSpec& unit, const PriceStats& stats, int budget,
                               const SolverConfig& solver, int window) {
  if (budget < 0 || budget > kHoursPerDay)
    throw InputError("budget must lie in 0..24, got " + std::to_string(budget));
  UncertaintyModel model;
  model.nominal.assign(stats.nominal.begin(), stats.nominal.end());
  model.deviation.assign(stats.deviation.begin(), stats.deviation.end());
  model.budget = budget;

  OfferingRun run;
  run.stats = stats;
  run.result = solve(build_robust(unit, model), solver);
  if (run.result.status == SolveStatus::kInfeasible) throw SolverError("offering problem is infeasible");
  run.offer.schedule = run.result.schedule;
  run.offer.quantity = run.result.schedule.p;
  run.offer.trim = stats.trim;
  run.offer.budget = budget;
  run.offer.window = window;
  run.offer.unit_id = unit.id;
  return run;
}

OfferingRun gamma_offering_run(const UnitSpec& unit, const HourlyObservations& observations,
                               int trim, int budget, const SolverConfig& solver, int window) {
  return gamma_offering_run(unit, trim_stats(observations, trim), budget, solver, window);
}

void write_offer(std::ostream& out, const ZeroPriceOffer& offer) {
  out << "hour,quantity_mw,price_eur_mwh\n";
  for (std::size_t t = 0; t < offer.quantity.size(); ++t)
    out << t + 1 << ',' << text::format_double(offer.quantity[t]) << ",0\n";
}

}  // namespace offering
