#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace offering {

using Date = std::chrono::year_month_day;

inline constexpr int kHoursPerDay = 24;

Date parse_date(const std::string& iso);  // YYYY-MM-DD, throws InputError
std::string format_date(Date d);
bool is_weekday(Date d);

struct PriceRecord {
  Date date;
  int hour = 1;  // 1..24
  std::string zone;
  double price = 0.0;  // EUR/MWh
};

/// Hourly day-ahead prices, possibly for several zones. Records are kept
/// sorted by (zone, date, hour) and unique on that key.
class PriceSeries {
 public:
  PriceSeries() = default;
  /// Sorts and checks the records; throws InputError on duplicates, hours
  /// outside 1..24 or negative prices.
  explicit PriceSeries(std::vector<PriceRecord> records);

  const std::vector<PriceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::vector<std::string> zones() const;

  bool has_day(const std::string& zone, Date date) const;
  /// All 24 prices of one day; throws InputError if any hour is missing.
  std::array<double, kHoursPerDay> day(const std::string& zone, Date date) const;

 private:
  std::vector<PriceRecord> records_;
  // (zone, sys_days count) -> index of the first record of that day.
  std::map<std::pair<std::string, long>, std::size_t> day_index_;
};

PriceSeries read_prices(std::istream& in);
PriceSeries read_prices_file(const std::string& path);
void write_prices(std::ostream& out, const PriceSeries& series);

/// Per-hour price statistics used as nominal value and worst deviation.
struct PriceStats {
  std::array<double, kHoursPerDay> nominal{};        // mean of all observations
  std::array<double, kHoursPerDay> trimmed_worst{};  // (J+1)-th smallest observation
  std::array<double, kHoursPerDay> deviation{};      // max(0, nominal - trimmed_worst)
  int observations = 0;                               // I
  int trim = 0;                                       // J
  std::vector<std::string> warnings;
};

using HourlyObservations = std::array<std::vector<double>, kHoursPerDay>;

PriceStats trim_stats(const HourlyObservations& observations, int trim);
PriceStats trim_stats(const PriceSeries& series, const std::string& zone,
                      const std::vector<Date>& training_dates, int trim);
HourlyObservations collect_observations(const PriceSeries& series, const std::string& zone,
                                        const std::vector<Date>& dates);

struct BacktestWindow {
  int index = 1;  // 1-based
  std::vector<Date> training;
  std::vector<Date> evaluation;
};

/// Week k (1-based) of `year` is the Monday-Friday block starting on the k-th
/// Monday on or after January 1st.
std::vector<Date> weekdays_of_week(int year, int week);

/// Rolling (train_weeks + 1)-week windows shifted by one week. Window w trains
/// on weeks w..w+train_weeks-1 and evaluates on week w+train_weeks. Every
/// date used must be fully present for `zone`.
std::vector<BacktestWindow> make_windows(const PriceSeries& series, const std::string& zone,
                                         int year, int count = 24, int train_weeks = 4);

struct SyntheticProfile {
  double base = 45.0;            // EUR/MWh
  double morning_peak = 14.0;    // amplitude at morning_hour
  double evening_peak = 20.0;    // amplitude at evening_hour
  double morning_hour = 9.0;
  double evening_hour = 19.5;
  double peak_width = 2.5;       // hours
  double night_dip = 12.0;       // depth of the early-morning valley at hour 4
  double weekend_factor = 0.85;  // multiplies the shape on Saturday and Sunday
  double hourly_sigma = 4.0;     // iid hourly noise
  double daily_sigma = 3.0;      // innovation of the AR(1) daily level
  double daily_ar = 0.7;
  double trough_probability = 0.06;  // per day
  double trough_depth = 30.0;        // midday depression on trough days
};

/// Expected price of hour h (1..24) on a weekday, before noise and troughs.
double profile_price(const SyntheticProfile& profile, int hour);

/// Deterministic synthetic year of hourly prices for zones "Z1".."Zn",
/// rounded to cents and floored at 0.
PriceSeries gen_synthetic(std::uint64_t seed, int year, int zones,
                          const SyntheticProfile& profile = {});

}  // namespace offering
