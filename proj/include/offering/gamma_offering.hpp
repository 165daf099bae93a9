#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "offering/miqp.hpp"
#include "offering/prices.hpp"

namespace offering {

/// Hourly quantities offered at price zero, with the commitment they came from.
struct ZeroPriceOffer {
  std::vector<double> quantity;  // MW per hour
  Schedule schedule;             // solved schedule; schedule.p == quantity
  int trim = 0;                  // J
  int budget = 0;                // Gamma
  int window = 0;                // 0 when not tied to a backtest window
  std::string unit_id;
};

struct OfferingRun {
  ZeroPriceOffer offer;
  PriceStats stats;
  SolveResult result;  // robust objective, status, bound
};

/// One robust solve with nominal prices and deviations from `stats`.
OfferingRun gamma_offering_run(const UnitSpec& unit, const PriceStats& stats, int budget,
                               const SolverConfig& solver = {}, int window = 0);

/// Trims the observations (J = `trim`) and runs the offer.
OfferingRun gamma_offering_run(const UnitSpec& unit, const HourlyObservations& observations,
                               int trim, int budget, const SolverConfig& solver = {},
                               int window = 0);

/// `hour,quantity_mw,price_eur_mwh` with a zero price column.
void write_offer(std::ostream& out, const ZeroPriceOffer& offer);

}  // namespace offering
