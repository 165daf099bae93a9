// Command-line front end: solve, offer, barcon-demo, backtest, gen-prices.
//
// Every run writes its outputs plus manifest.json into <out>/<command>-<digest>,
// where the digest covers the command, resolved configuration, input file
// digests and seed (not the wall time).

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "offering/backtest.hpp"
#include "offering/barcon.hpp"
#include "offering/text_util.hpp"

#ifndef OFFERING_VERSION
#define OFFERING_VERSION "0.0.0"
#endif
#ifndef OFFERING_DEFAULT_DATA_DIR
#define OFFERING_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace offering;

namespace {

enum Exit { kOk = 0, kInputError = 2, kSolverLimit = 3, kInfeasible = 4 };

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string data_dir() {
  if (const char* env = std::getenv("OFFERING_DATA_DIR"); env && *env) return env;
  return OFFERING_DEFAULT_DATA_DIR;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& field : text::split(s, ',')) {
    const auto x = text::parse_double(text::trim(field));
    if (!x) throw InputError(std::string("bad number '") + field + "' in " + what);
    out.push_back(*x);
  }
  return out;
}

// "0,2,4" or "0-24" or a mix.
std::vector<int> parse_int_set(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const auto& raw : text::split(s, ',')) {
    const std::string field = text::trim(raw);
    const auto dash = field.find('-', 1);
    if (dash != std::string::npos) {
      const auto lo = text::parse_int(field.substr(0, dash));
      const auto hi = text::parse_int(field.substr(dash + 1));
      if (!lo || !hi || *lo > *hi) throw InputError(std::string("bad range '") + field + "' in " + what);
      for (int v = *lo; v <= *hi; ++v) out.push_back(v);
    } else {
      const auto v = text::parse_int(field);
      if (!v) throw InputError(std::string("bad integer '") + field + "' in " + what);
      out.push_back(*v);
    }
  }
  return out;
}

struct Run {
  std::string command;
  json config = json::object();
  json inputs = json::object();  // path -> sha256
  std::optional<std::uint64_t> seed;
  std::string out_root = "runs";
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, std::string>> files;  // name -> contents

  void input(const std::string& path) { inputs[path] = sha256_hex(slurp(path)); }

  json manifest() const {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = inputs;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["version"] = OFFERING_VERSION;
    return m;
  }

  fs::path write() const {
    json m = manifest();
    const fs::path dir = fs::path(out_root) / (command + "-" + sha256_hex(m.dump()).substr(0, 16));
    fs::create_directories(dir);
    for (const auto& [name, contents] : files) {
      std::ofstream out(dir / name, std::ios::binary);
      out << contents;
      if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    }
    m["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
    return dir;
  }
};

std::string schedule_csv(const Schedule& s) {
  std::ostringstream os;
  os << "hour,p_mw,u,v,w,suc_eur\n";
  for (std::size_t t = 0; t < s.horizon(); ++t)
    os << t + 1 << ',' << text::format_double(s.p[t]) << ',' << s.u[t] << ',' << s.v[t] << ','
       << s.w[t] << ',' << text::format_double(s.suc[t]) << '\n';
  return os.str();
}

std::string result_text(const SolveResult& r, Flavor flavor) {
  std::ostringstream os;
  os << "status " << to_string(r.status) << '\n'
     << "objective_eur " << text::format_double(r.objective) << '\n'
     << "bound_eur " << text::format_double(r.bound) << '\n'
     << "gap " << text::format_double(r.gap) << '\n'
     << "nodes " << r.nodes << '\n';
  if (flavor == Flavor::kDualizedRobust) {
    os << "z " << text::format_double(r.z) << '\n' << "q";
    for (double q : r.q) os << ' ' << text::format_double(q);
    os << '\n';
  }
  return os.str();
}

int status_exit(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return kOk;
    case SolveStatus::kInfeasible: return kInfeasible;
    default: return kSolverLimit;
  }
}

SolverConfig solver_config(double gap, double time_limit, long node_limit) {
  SolverConfig c;
  c.gap_tolerance = gap;
  c.time_limit_seconds = time_limit;
  c.node_limit = node_limit;
  c.validate();
  return c;
}

json solver_json(const SolverConfig& c) {
  return {{"gap_tolerance", c.gap_tolerance},
          {"absolute_gap_tolerance", c.absolute_gap_tolerance},
          {"feasibility_tolerance", c.feasibility_tolerance},
          {"node_limit", c.node_limit},
          {"time_limit_seconds", c.time_limit_seconds}};
}

std::string stats_csv(const PriceStats& s) {
  std::ostringstream os;
  os << "hour,nominal_eur_mwh,trimmed_worst_eur_mwh,deviation_eur_mwh\n";
  for (int t = 0; t < kHoursPerDay; ++t)
    os << t + 1 << ',' << text::format_double(s.nominal[t]) << ','
       << text::format_double(s.trimmed_worst[t]) << ',' << text::format_double(s.deviation[t])
       << '\n';
  return os.str();
}

// Resolves zone/year defaults of a series and returns the requested window.
BacktestWindow pick_window(const PriceSeries& series, std::string& zone, int& year, int window) {
  if (series.size() == 0) throw InputError("empty price series");
  if (zone.empty()) zone = series.zones().front();
  if (year == 0) year = static_cast<int>(series.records().front().date.year());
  const auto windows = make_windows(series, zone, year);
  if (window < 1 || window > static_cast<int>(windows.size()))
    throw InputError("window must lie in 1.." + std::to_string(windows.size()));
  return windows[static_cast<std::size_t>(window - 1)];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead energy offering under price uncertainty"};
  app.set_version_flag("--version", OFFERING_VERSION);
  app.require_subcommand(1);
  std::string out_root = "runs";
  app.add_option("--out", out_root, "Root directory for run outputs")->capture_default_str();

  double gap = 1e-6, time_limit = 10.0;
  long node_limit = 1'000'000;
  auto solver_options = [&](CLI::App* sub) {
    sub->add_option("--gap", gap, "Relative gap tolerance")->capture_default_str();
    sub->add_option("--time-limit", time_limit, "Seconds per solve")->capture_default_str();
    sub->add_option("--node-limit", node_limit, "Nodes per solve")->capture_default_str();
  };

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one offering problem");
  std::string unit_file, prices_arg, deviations_arg, flavor_arg = "nominal", price_file, zone;
  int budget = -1, window = 0, trim = 0, year = 0;
  solve_cmd->add_option("--unit", unit_file, "Unit file (default: bundled example unit)");
  solve_cmd->add_option("--prices", prices_arg, "Comma-separated nominal prices, EUR/MWh");
  solve_cmd->add_option("--deviations", deviations_arg, "Comma-separated deviations, EUR/MWh");
  solve_cmd->add_option("--price-file", price_file, "Price history; nominal and deviations from a training window");
  solve_cmd->add_option("--window", window, "Backtest window (1-based) for --price-file");
  solve_cmd->add_option("--trim", trim, "Observations excluded per hour (J)");
  solve_cmd->add_option("--zone", zone, "Zone in the price file");
  solve_cmd->add_option("--year", year, "Calendar year of the windows");
  solve_cmd->add_option("--flavor", flavor_arg, "nominal | robust | worst-case")->capture_default_str();
  solve_cmd->add_option("--budget", budget, "Gamma (robust flavor; default 0)");
  solver_options(solve_cmd);

  // offer
  auto* offer_cmd = app.add_subcommand("offer", "Zero-price offer from a training window");
  offer_cmd->add_option("--unit", unit_file, "Unit file")->required();
  offer_cmd->add_option("--price-file", price_file, "Price history")->required();
  offer_cmd->add_option("--window", window, "Backtest window (1-based)")->required();
  offer_cmd->add_option("--trim", trim, "Observations excluded per hour (J)")->capture_default_str();
  offer_cmd->add_option("--budget", budget, "Gamma")->required();
  offer_cmd->add_option("--zone", zone, "Zone in the price file");
  offer_cmd->add_option("--year", year, "Calendar year of the windows");
  solver_options(offer_cmd);

  // barcon-demo
  auto* demo_cmd = app.add_subcommand("barcon-demo", "Curve-building method on the worked example, with audit");
  solver_options(demo_cmd);

  // backtest
  auto* bt_cmd = app.add_subcommand("backtest", "Rolling-window backtest over units, J and Gamma");
  std::string units_dir, trims_arg = "0,2,4", budgets_arg = "0-24";
  int jobs = 0;
  bt_cmd->add_option("--units", units_dir, "Directory of *.unit files")->required();
  bt_cmd->add_option("--price-file", price_file, "Price history")->required();
  bt_cmd->add_option("--trims", trims_arg, "J values")->capture_default_str();
  bt_cmd->add_option("--budgets", budgets_arg, "Gamma values")->capture_default_str();
  bt_cmd->add_option("--zone", zone, "Zone in the price file");
  bt_cmd->add_option("--year", year, "Calendar year of the windows");
  bt_cmd->add_option("--jobs", jobs, "Parallel cells (default: logical cores)");
  solver_options(bt_cmd);

  // gen-prices
  auto* gen_cmd = app.add_subcommand("gen-prices", "Synthetic hourly price year");
  std::uint64_t seed = 1;
  int zones = 1;
  std::string output;
  year = 0;
  gen_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--year", year, "Calendar year")->required();
  gen_cmd->add_option("--zones", zones, "Number of zones")->capture_default_str();
  gen_cmd->add_option("--output", output, "Also copy the price file here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  Run run;
  run.out_root = out_root;
  int code = kOk;
  try {
    if (*solve_cmd) {
      run.command = "solve";
      if (unit_file.empty()) unit_file = (fs::path(data_dir()) / "example1.unit").string();
      const UnitSpec unit = read_unit_file(unit_file);
      run.input(unit_file);
      const SolverConfig solver = solver_config(gap, time_limit, node_limit);

      UncertaintyModel model;
      if (!price_file.empty()) {
        if (!prices_arg.empty()) throw InputError("give either --prices or --price-file");
        const PriceSeries series = read_prices_file(price_file);
        run.input(price_file);
        const auto w = pick_window(series, zone, year, window);
        const PriceStats stats = trim_stats(series, zone, w.training, trim);
        model.nominal.assign(stats.nominal.begin(), stats.nominal.end());
        model.deviation.assign(stats.deviation.begin(), stats.deviation.end());
        run.files.emplace_back("stats.csv", stats_csv(stats));
        for (const auto& warning : stats.warnings) std::cerr << "warning: " << warning << '\n';
        run.config["window"] = window;
        run.config["trim"] = trim;
        run.config["zone"] = zone;
        run.config["year"] = year;
      } else {
        if (prices_arg.empty()) throw InputError("--prices or --price-file is required");
        model.nominal = parse_list(prices_arg, "--prices");
        model.deviation = deviations_arg.empty() ? std::vector<double>(model.nominal.size(), 0.0)
                                                 : parse_list(deviations_arg, "--deviations");
      }

      RobustProblem problem;
      if (flavor_arg == "nominal") {
        if (!deviations_arg.empty() || budget > 0)
          throw InputError("nominal flavor takes no deviations or budget");
        problem = build_nominal(unit, model.nominal);
      } else if (flavor_arg == "robust") {
        model.budget = budget < 0 ? 0 : budget;
        problem = build_robust(unit, model);
      } else if (flavor_arg == "worst-case") {
        model.budget = budget < 0 ? static_cast<int>(model.horizon()) : budget;
        problem = worst_case_equivalent(unit, model);
      } else {
        throw InputError("unknown flavor '" + flavor_arg + "'");
      }
      run.config["flavor"] = flavor_arg;
      run.config["nominal"] = model.nominal;
      run.config["deviation"] = model.deviation;
      run.config["budget"] = problem.model.budget;
      run.config["solver"] = solver_json(solver);

      const SolveResult result = solve(problem, solver);
      run.files.emplace_back("schedule.csv", schedule_csv(result.schedule));
      run.files.emplace_back("result.txt", result_text(result, problem.flavor));
      std::cout << result_text(result, problem.flavor) << schedule_csv(result.schedule);
      code = status_exit(result.status);
    } else if (*offer_cmd) {
      run.command = "offer";
      const UnitSpec unit = read_unit_file(unit_file);
      run.input(unit_file);
      const PriceSeries series = read_prices_file(price_file);
      run.input(price_file);
      const SolverConfig solver = solver_config(gap, time_limit, node_limit);
      const auto w = pick_window(series, zone, year, window);
      const PriceStats stats = trim_stats(series, zone, w.training, trim);
      for (const auto& warning : stats.warnings) std::cerr << "warning: " << warning << '\n';
      const OfferingRun result = gamma_offering_run(unit, stats, budget, solver, window);
      run.config = {{"window", window}, {"trim", trim},     {"budget", budget},
                    {"zone", zone},     {"year", year},     {"solver", solver_json(solver)}};
      std::ostringstream offer;
      write_offer(offer, result.offer);
      run.files.emplace_back("offer.csv", offer.str());
      run.files.emplace_back("stats.csv", stats_csv(stats));
      run.files.emplace_back("schedule.csv", schedule_csv(result.offer.schedule));
      run.files.emplace_back("result.txt", result_text(result.result, Flavor::kDualizedRobust));
      std::cout << offer.str();
      code = status_exit(result.result.status);
    } else if (*demo_cmd) {
      run.command = "barcon-demo";
      const SolverConfig solver = solver_config(gap, time_limit, node_limit);
      const UnitSpec unit = calibrate_example_unit();
      const BarConConfig config = example_barcon_config();
      const BarConRun bc = barcon_run(unit, config, solver);
      run.config = {{"price_min", config.price_min},
                    {"price_max", config.price_max},
                    {"shortfall", config.shortfall},
                    {"iterations", config.iterations},
                    {"scenarios", example_scenarios()},
                    {"solver", solver_json(solver)}};
      std::ostringstream report;
      for (std::size_t k = 0; k < bc.solves.size(); ++k) {
        report << "iteration " << k + 1 << ": prices";
        for (double x : bc.prices[k]) report << ' ' << text::format_double(x);
        report << ", output";
        for (double p : bc.solves[k].schedule.p) report << ' ' << text::format_double(p);
        report << ", profit " << text::format_fixed(bc.solves[k].objective, 2) << " EUR\n";
      }
      std::ostringstream curve;
      write_curve(curve, bc.curve);
      report << "\nmerged curves\n" << curve.str();
      for (const auto& d : bc.curve.diagnostics) report << "note: " << d << '\n';
      report << "\nfindings\n";
      for (const auto& f : audit_curves(unit, bc.curve, example_scenarios(), solver))
        report << f << '\n';
      run.files.emplace_back("curve.csv", curve.str());
      run.files.emplace_back("audit.txt", report.str());
      std::cout << report.str();
    } else if (*bt_cmd) {
      run.command = "backtest";
      std::vector<fs::path> unit_paths;
      if (!fs::is_directory(units_dir)) throw InputError("not a directory: " + units_dir);
      for (const auto& entry : fs::directory_iterator(units_dir))
        if (entry.path().extension() == ".unit") unit_paths.push_back(entry.path());
      std::sort(unit_paths.begin(), unit_paths.end());
      if (unit_paths.empty()) throw InputError("no *.unit files in " + units_dir);
      std::vector<UnitSpec> units;
      for (const auto& p : unit_paths) {
        try {
          units.push_back(read_unit_file(p.string()));
        } catch (const InputError& e) {
          throw InputError(p.string() + ": " + e.what());
        }
        run.input(p.string());
      }
      const PriceSeries series = read_prices_file(price_file);
      run.input(price_file);
      BacktestConfig config;
      config.trims = parse_int_set(trims_arg, "--trims");
      config.budgets = parse_int_set(budgets_arg, "--budgets");
      config.zone = zone;
      config.year = year;
      config.jobs = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      config.solver = solver_config(gap, time_limit, node_limit);
      // Job count does not change outputs, so it stays out of the manifest digest.
      run.config = {{"trims", config.trims},
                    {"budgets", config.budgets},
                    {"zone", zone},
                    {"year", year},
                    {"solver", solver_json(config.solver)}};
      const BacktestReport report = backtest_run(units, series, config);
      std::ostringstream records;
      write_records(records, report.records);
      run.files.emplace_back("report.csv", format_report_csv(report));
      run.files.emplace_back("report.txt", format_report_table(report));
      run.files.emplace_back("records.csv", records.str());
      std::cout << format_report_table(report);
      if (!report.failures.empty()) code = kSolverLimit;
    } else if (*gen_cmd) {
      run.command = "gen-prices";
      run.seed = seed;
      run.config = {{"year", year}, {"zones", zones}};
      const PriceSeries series = gen_synthetic(seed, year, zones);
      std::ostringstream os;
      write_prices(os, series);
      run.files.emplace_back("prices.csv", os.str());
      if (!output.empty()) {
        std::ofstream out(output, std::ios::binary);
        out << os.str();
        if (!out) throw InputError("cannot write " + output);
      }
      std::cout << series.size() << " records\n";
    }
    const fs::path dir = run.write();
    std::cerr << "outputs: " << dir.string() << '\n';
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return code;
}
