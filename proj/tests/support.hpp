#pragma once

// Random instance generators shared by the property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "offering/robust.hpp"
#include "offering/units.hpp"

namespace testing_support {

using offering::UnitSpec;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (auto& x : out) x = real(lo, hi);
    return out;
  }

  // All MW parameters are whole numbers so a 1 MW grid contains every vertex
  // the ramps and bounds can produce.
  UnitSpec unit(int max_min_time = 3) {
    UnitSpec u;
    u.id = "rand";
    u.p_min = integer(0, 60);
    u.p_max = u.p_min + integer(20, 140);
    u.ramp_up = integer(10, 80);
    u.ramp_down = integer(10, 80);
    u.ramp_startup = std::max<double>(u.p_min, integer(10, 120));
    u.ramp_shutdown = std::max<double>(u.p_min, integer(10, 120));
    u.min_up = integer(1, max_min_time);
    u.min_down = integer(1, max_min_time);
    u.cost_a = real(0.0, 0.05);
    u.cost_b = real(20.0, 45.0);
    u.cost_fixed = real(0.0, 400.0);
    double suc = real(0.0, 300.0);
    const int steps = integer(1, 3);
    for (int k = 0; k < steps; ++k) {
      u.suc_schedule.push_back(suc);
      suc += real(0.0, 200.0);
    }
    u.initial.on = coin();
    u.initial.dwell_hours = integer(1, 4);
    u.initial.output_mw = u.initial.on ? integer(static_cast<int>(u.p_min), static_cast<int>(u.p_max)) : 0.0;
    return u;
  }

  offering::UncertaintyModel model(std::size_t horizon) {
    offering::UncertaintyModel m;
    m.nominal = reals(horizon, 20.0, 80.0);
    m.deviation = reals(horizon, 0.0, 15.0);
    m.budget = integer(0, static_cast<int>(horizon));
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

// A mid-sized unit for 24-hour instances, scaled randomly around a combined
// cycle plant.
inline UnitSpec plant(Gen& g) {
  UnitSpec u;
  u.id = "plant";
  u.p_min = g.real(80.0, 200.0);
  u.p_max = u.p_min + g.real(150.0, 300.0);
  u.ramp_up = g.real(60.0, 160.0);
  u.ramp_down = g.real(60.0, 160.0);
  u.ramp_startup = u.p_min + g.real(0.0, 60.0);
  u.ramp_shutdown = u.p_min + g.real(0.0, 60.0);
  u.min_up = g.integer(1, 5);
  u.min_down = g.integer(1, 4);
  u.cost_a = g.real(0.0, 0.01);
  u.cost_b = g.real(30.0, 45.0);
  u.cost_fixed = g.real(200.0, 1200.0);
  u.suc_schedule = {g.real(1000.0, 3000.0)};
  u.suc_schedule.push_back(u.suc_schedule.back() + g.real(0.0, 2000.0));
  u.initial.on = g.coin(0.3);
  u.initial.dwell_hours = g.integer(1, 6);
  u.initial.output_mw = u.initial.on ? g.real(u.p_min, u.p_max) : 0.0;
  return u;
}

inline double relative_difference(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing_support
