#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr together
};

Outcome run(const std::string& args) {
  const std::string command = std::string("\"") + OFFERING_CLI + "\" " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.output.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// The run directory named on the "outputs:" line.
fs::path outputs_of(const Outcome& o) {
  const auto at = o.output.find("outputs: ");
  REQUIRE(at != std::string::npos);
  const auto end = o.output.find('\n', at);
  return o.output.substr(at + 9, end - at - 9);
}

class Scratch {
 public:
  Scratch() {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("offering-cli-" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }
  std::string out() const { return "--out \"" + (dir_ / "runs").string() + "\" "; }

 private:
  fs::path dir_;
};

const std::string kData = OFFERING_DATA;

}  // namespace

TEST_CASE("gen-prices is reproducible from its seed") {
  Scratch s;
  const auto a = run(s.out() + "gen-prices --seed 5 --year 2014 --output \"" + (s / "a.csv").string() + "\"");
  const auto b = run(s.out() + "gen-prices --seed 5 --year 2014 --output \"" + (s / "b.csv").string() + "\"");
  const auto c = run(s.out() + "gen-prices --seed 6 --year 2014 --output \"" + (s / "c.csv").string() + "\"");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(read_file(s / "a.csv") == read_file(s / "b.csv"));
  CHECK(read_file(s / "a.csv") != read_file(s / "c.csv"));
  CHECK(outputs_of(a) == outputs_of(b));
  CHECK(read_file(outputs_of(a) / "prices.csv") == read_file(s / "a.csv"));
  CHECK(fs::exists(outputs_of(a) / "manifest.json"));
}

TEST_CASE("input errors exit with code 2") {
  Scratch s;
  const auto missing = run(s.out() + "solve --price-file \"" + (s / "none.csv").string() + "\" --window 1");
  CHECK(missing.code == 2);
  CHECK(missing.output.find("none.csv") != std::string::npos);

  std::string unit = read_file(kData + "/example1.unit");
  REQUIRE_FALSE(unit.empty());
  // Break the third line.
  std::size_t pos = 0;
  for (int line = 0; line < 2; ++line) pos = unit.find('\n', pos) + 1;
  unit.insert(pos, "garbage line without a value\n");
  std::ofstream(s / "bad.unit") << unit;
  const auto bad = run(s.out() + "solve --unit \"" + (s / "bad.unit").string() + "\" --prices 50,50,50");
  CHECK(bad.code == 2);
  CHECK(bad.output.find("line 3") != std::string::npos);

  CHECK(run(s.out() + "solve --prices 50,x,50").code == 2);
  CHECK(run(s.out() + "solve --prices 50,50 --flavor sideways").code == 2);
  CHECK(run(s.out() + "solve --prices 50,50 --deviations 1").code == 2);
  CHECK(run(s.out() + "nonsense").code == 2);
}

TEST_CASE("solve on the bundled example") {
  Scratch s;
  const auto worst = run(s.out() + "solve --flavor worst-case --prices 54,55,61");
  REQUIRE(worst.code == 0);
  const fs::path dir = outputs_of(worst);
  CHECK(read_file(dir / "schedule.csv") ==
        "hour,p_mw,u,v,w,suc_eur\n1,160,1,1,0,0\n2,215,1,0,0,0\n3,270,1,0,0,0\n");
  CHECK(read_file(dir / "result.txt").find("status optimal") == 0);

  // Deviations with no budget change nothing.
  const auto nominal = run(s.out() + "solve --prices 54,55,61");
  const auto robust = run(s.out() + "solve --flavor robust --budget 0 --prices 54,55,61 --deviations 1,1,1");
  REQUIRE(nominal.code == 0);
  REQUIRE(robust.code == 0);
  CHECK(read_file(outputs_of(nominal) / "schedule.csv") == read_file(outputs_of(robust) / "schedule.csv"));

  // Same command, same directory, same bytes.
  const auto again = run(s.out() + "solve --flavor worst-case --prices 54,55,61");
  CHECK(outputs_of(again) == dir);
  CHECK(read_file(outputs_of(again) / "schedule.csv") == read_file(dir / "schedule.csv"));
}

TEST_CASE("barcon-demo reports both findings") {
  Scratch s;
  const auto demo = run(s.out() + "barcon-demo");
  REQUIRE(demo.code == 0);
  CHECK(demo.output.find("ramp-infeasible: realized (52,53,61), accepted (0,0,270)") != std::string::npos);
  CHECK(demo.output.find("suboptimal: realized (54,53,59), accepted (160,0,160), achieved profit 544.00") !=
        std::string::npos);
  const fs::path dir = outputs_of(demo);
  CHECK(read_file(dir / "curve.csv").find("3,3,270,61") != std::string::npos);
}

TEST_CASE("offer and backtest from a synthetic year") {
  Scratch s;
  const std::string prices = (s / "p.csv").string();
  REQUIRE(run(s.out() + "gen-prices --seed 3 --year 2014 --output \"" + prices + "\"").code == 0);
  const std::string unit = "--unit \"" + kData + "/units/ccgt.unit\" --price-file \"" + prices + "\" ";

  const auto a = run(s.out() + "offer " + unit + "--window 10 --budget 4 --trim 2");
  REQUIRE(a.code == 0);
  const std::string offer = read_file(outputs_of(a) / "offer.csv");
  CHECK(offer.rfind("hour,quantity_mw,price_eur_mwh\n", 0) == 0);
  CHECK(std::count(offer.begin(), offer.end(), '\n') == 25);
  // A second process writes the same bytes.
  fs::remove_all(outputs_of(a));
  const auto b = run(s.out() + "offer " + unit + "--window 10 --budget 4 --trim 2");
  CHECK(read_file(outputs_of(b) / "offer.csv") == offer);

  CHECK(run(s.out() + "offer " + unit + "--window 0 --budget 4").code == 2);
  CHECK(run(s.out() + "offer " + unit + "--window 99 --budget 4").code == 2);
  CHECK(run(s.out() + "offer " + unit + "--window 1 --budget 25").code == 2);

  const auto bt = run(s.out() + "backtest --units \"" + kData + "/units\" --price-file \"" + prices +
                      "\" --trims 0,2 --budgets 0,12,24 --jobs 2");
  REQUIRE(bt.code == 0);
  const fs::path dir = outputs_of(bt);
  const std::string report = read_file(dir / "report.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 2);  // header + units x J
  const std::string records = read_file(dir / "records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 1 + 2 * 3 * 24);
  CHECK(run(s.out() + "backtest --units \"" + (s / "nowhere").string() + "\" --price-file \"" + prices + "\"").code ==
        2);
}
