#include "offering/prices.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <tuple>

#include "offering/text_util.hpp"
#include "offering/units.hpp"

namespace offering {

using std::chrono::days;
using std::chrono::sys_days;

Date parse_date(const std::string& iso) {
  const auto parts = text::split(iso, '-');
  if (parts.size() != 3 || parts[0].size() != 4 || parts[1].size() != 2 || parts[2].size() != 2)
    throw InputError("bad date '" + iso + "', expected YYYY-MM-DD");
  const auto y = text::parse_int(parts[0]);
  const auto m = text::parse_int(parts[1]);
  const auto d = text::parse_int(parts[2]);
  if (!y || !m || !d) throw InputError("bad date '" + iso + "'");
  const Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) throw InputError("invalid calendar date '" + iso + "'");
  return date;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

bool is_weekday(Date d) {
  const std::chrono::weekday wd{sys_days{d}};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

namespace {

long day_number(Date d) { return sys_days{d}.time_since_epoch().count(); }

}  // namespace

PriceSeries::PriceSeries(std::vector<PriceRecord> records) : records_(std::move(records)) {
  auto key = [](const PriceRecord& r) { return std::make_tuple(r.zone, day_number(r.date), r.hour); };
  std::stable_sort(records_.begin(), records_.end(),
                   [&](const PriceRecord& a, const PriceRecord& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.hour < 1 || r.hour > kHoursPerDay)
      throw InputError("hour " + std::to_string(r.hour) + " outside 1..24");
    if (!(r.price >= 0.0)) throw InputError("negative price on " + format_date(r.date));
    if (i > 0 && key(records_[i - 1]) == key(r))
      throw InputError("duplicate record for zone " + r.zone + " " + format_date(r.date) +
                       " hour " + std::to_string(r.hour));
    day_index_.emplace(std::make_pair(r.zone, day_number(r.date)), i);
  }
}

std::vector<std::string> PriceSeries::zones() const {
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (out.empty() || out.back() != r.zone) out.push_back(r.zone);
  return out;
}

bool PriceSeries::has_day(const std::string& zone, Date date) const {
  const auto it = day_index_.find({zone, day_number(date)});
  if (it == day_index_.end()) return false;
  const std::size_t first = it->second;
  if (first + kHoursPerDay > records_.size()) return false;
  for (int h = 0; h < kHoursPerDay; ++h) {
    const auto& r = records_[first + static_cast<std::size_t>(h)];
    if (r.zone != zone || r.date != date || r.hour != h + 1) return false;
  }
  return true;
}

std::array<double, kHoursPerDay> PriceSeries::day(const std::string& zone, Date date) const {
  if (!has_day(zone, date))
    throw InputError("prices for zone " + zone + " on " + format_date(date) + " are incomplete");
  const std::size_t first = day_index_.at({zone, day_number(date)});
  std::array<double, kHoursPerDay> out{};
  for (int h = 0; h < kHoursPerDay; ++h) out[static_cast<std::size_t>(h)] = records_[first + static_cast<std::size_t>(h)].price;
  return out;
}

PriceSeries read_prices(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || text::trim(line) != "date,hour,zone,price_eur_mwh")
    throw InputError("expected header 'date,hour,zone,price_eur_mwh'", line_no);
  std::vector<PriceRecord> records;
  std::map<std::tuple<std::string, long, int>, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw InputError("expected 4 comma-separated fields", line_no);
    PriceRecord r;
    try {
      r.date = parse_date(text::trim(fields[0]));
    } catch (const InputError& e) {
      throw InputError(e.what(), line_no);
    }
    const auto hour = text::parse_int(text::trim(fields[1]));
    if (!hour || *hour < 1 || *hour > kHoursPerDay)
      throw InputError("hour must be an integer in 1..24, got '" + fields[1] + "'", line_no);
    r.hour = *hour;
    r.zone = text::trim(fields[2]);
    if (r.zone.empty()) throw InputError("empty zone", line_no);
    const auto price = text::parse_double(text::trim(fields[3]));
    if (!price) throw InputError("bad price '" + fields[3] + "'", line_no);
    if (*price < 0.0) throw InputError("negative price " + fields[3], line_no);
    r.price = *price;
    const auto key = std::make_tuple(r.zone, day_number(r.date), r.hour);
    if (const auto it = seen.find(key); it != seen.end())
      throw InputError("duplicate record (first seen on line " + std::to_string(it->second) + ")",
                       line_no);
    seen.emplace(key, line_no);
    records.push_back(std::move(r));
  }
  return PriceSeries(std::move(records));
}

PriceSeries read_prices_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file '" + path + "'");
  try {
    return read_prices(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_prices(std::ostream& out, const PriceSeries& series) {
  out << "date,hour,zone,price_eur_mwh\n";
  for (const auto& r : series.records())
    out << format_date(r.date) << ',' << r.hour << ',' << r.zone << ','
        << text::format_double(r.price) << '\n';
}

PriceStats trim_stats(const HourlyObservations& observations, int trim) {
  PriceStats stats;
  stats.trim = trim;
  stats.observations = static_cast<int>(observations[0].size());
  for (int h = 0; h < kHoursPerDay; ++h) {
    std::vector<double> obs = observations[static_cast<std::size_t>(h)];
    const int count = static_cast<int>(obs.size());
    if (trim < 0) throw InputError("trim count must be non-negative");
    if (count < trim + 1)
      throw InputError("hour " + std::to_string(h + 1) + " has " + std::to_string(count) +
                       " observations, need at least " + std::to_string(trim + 1));
    if (count != stats.observations)
      throw InputError("hours have different observation counts");
    double sum = 0.0;
    for (double x : obs) sum += x;
    const double mean = sum / count;
    std::nth_element(obs.begin(), obs.begin() + trim, obs.end());
    const double worst = obs[static_cast<std::size_t>(trim)];
    double dev = mean - worst;
    if (dev < 0.0) {
      stats.warnings.push_back("hour " + std::to_string(h + 1) + ": trimmed worst price " +
                               text::format_double(worst) + " exceeds the mean " +
                               text::format_double(mean) + ", deviation clamped to 0");
      dev = 0.0;
    }
    stats.nominal[static_cast<std::size_t>(h)] = mean;
    stats.trimmed_worst[static_cast<std::size_t>(h)] = worst;
    stats.deviation[static_cast<std::size_t>(h)] = dev;
  }
  return stats;
}

HourlyObservations collect_observations(const PriceSeries& series, const std::string& zone,
                                        const std::vector<Date>& dates) {
  HourlyObservations obs;
  for (const Date& d : dates) {
    const auto prices = series.day(zone, d);
    for (int h = 0; h < kHoursPerDay; ++h)
      obs[static_cast<std::size_t>(h)].push_back(prices[static_cast<std::size_t>(h)]);
  }
  return obs;
}

PriceStats trim_stats(const PriceSeries& series, const std::string& zone,
                      const std::vector<Date>& training_dates, int trim) {
  if (training_dates.empty()) throw InputError("empty training window");
  return trim_stats(collect_observations(series, zone, training_dates), trim);
}

std::vector<Date> weekdays_of_week(int year, int week) {
  sys_days first{Date{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}}};
  while (std::chrono::weekday{first} != std::chrono::Monday) first += days{1};
  const sys_days monday = first + days{7 * (week - 1)};
  std::vector<Date> out;
  for (int i = 0; i < 5; ++i) out.emplace_back(monday + days{i});
  return out;
}

std::vector<BacktestWindow> make_windows(const PriceSeries& series, const std::string& zone,
                                         int year, int count, int train_weeks) {
  if (count < 1 || train_weeks < 1) throw InputError("window count and length must be positive");
  std::vector<BacktestWindow> windows;
  for (int w = 1; w <= count; ++w) {
    BacktestWindow win;
    win.index = w;
    for (int k = 0; k < train_weeks; ++k) {
      const auto days_k = weekdays_of_week(year, w + k);
      win.training.insert(win.training.end(), days_k.begin(), days_k.end());
    }
    win.evaluation = weekdays_of_week(year, w + train_weeks);
    for (const auto* set : {&win.training, &win.evaluation})
      for (const Date& d : *set)
        if (!series.has_day(zone, d))
          throw InputError("price series too short for " + std::to_string(count) +
                           " windows: zone " + zone + " lacks " + format_date(d));
    windows.push_back(std::move(win));
  }
  return windows;
}

double profile_price(const SyntheticProfile& p, int hour) {
  const double h = hour;
  auto bump = [&](double centre, double width) {
    const double x = (h - centre) / width;
    return std::exp(-0.5 * x * x);
  };
  return p.base + p.morning_peak * bump(p.morning_hour, p.peak_width) +
         p.evening_peak * bump(p.evening_hour, p.peak_width) - p.night_dip * bump(4.0, 2.0);
}

PriceSeries gen_synthetic(std::uint64_t seed, int year, int zones, const SyntheticProfile& profile) {
  if (zones < 1) throw InputError("need at least one zone");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const sys_days first{Date{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}}};
  const sys_days end{Date{std::chrono::year{year + 1}, std::chrono::January, std::chrono::day{1}}};
  std::vector<PriceRecord> records;
  for (int z = 1; z <= zones; ++z) {
    const std::string zone = "Z" + std::to_string(z);
    // Zones differ by a small deterministic offset so they are not copies.
    const double zone_shift = 1.5 * (z - 1);
    double level = 0.0;
    for (sys_days d = first; d < end; d += days{1}) {
      const Date date{d};
      level = profile.daily_ar * level + profile.daily_sigma * normal(rng);
      const bool trough = uniform(rng) < profile.trough_probability;
      const double shape_scale = is_weekday(date) ? 1.0 : profile.weekend_factor;
      for (int h = 1; h <= kHoursPerDay; ++h) {
        double price = shape_scale * profile_price(profile, h) + zone_shift + level +
                       profile.hourly_sigma * normal(rng);
        if (trough) {
          const double x = (h - 13.5) / 3.5;
          price -= profile.trough_depth * std::exp(-0.5 * x * x);
        }
        price = std::max(0.0, std::round(price * 100.0) / 100.0);
        records.push_back({date, h, zone, price});
      }
    }
  }
  return PriceSeries(std::move(records));
}

}  // namespace offering
