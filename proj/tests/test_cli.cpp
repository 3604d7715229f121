#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bandlab/rolling.hpp"
#include "bandlab/series.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = BANDLAB_CLI_PATH;
const fs::path kData = BANDLAB_TEST_DATA_DIR;

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: ", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("bandlab_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = kBin + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string data(const std::string& name) { return (kData / name).string(); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

} // namespace

TEST_CASE("bands writes one row per aligned date and round-trips") {
  const auto dir = fresh_dir("bands");
  const auto r = run_cli("bands " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --n 4 --k 1 --out " + (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  const auto rows = lines_of(slurp(dir / "o" / "bands.csv"));
  REQUIRE(rows.size() == 11);  // header + 10 aligned dates
  CHECK(rows[0] == "date,y,center,sigma,upper,lower");
  // warm-up region stays empty
  CHECK(rows[1].substr(rows[1].size() - 4) == ",,,,");
  CHECK(rows[3].substr(rows[3].size() - 4) == ",,,,");
  CHECK(rows[4].find(",,,,") == std::string::npos);

  // replaying the file through a parser reproduces the library values exactly
  const auto z = bandlab::load_price_csv(data("dip_z.csv"), "z");
  const auto x = bandlab::load_price_csv(data("dip_x.csv"), "x");
  const auto pair = bandlab::align_pair(z, x);
  const auto bands = bandlab::bollinger_bands(pair.values, bandlab::BandParams{4, 1.0});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string date, ys, cs, ss, us, ls;
    std::getline(row, date, ',');
    std::getline(row, ys, ',');
    std::getline(row, cs, ',');
    std::getline(row, ss, ',');
    std::getline(row, us, ',');
    std::getline(row, ls, ',');
    const auto idx = static_cast<Eigen::Index>(i) - 1;
    CHECK(date == bandlab::format_date(pair.dates[i - 1]));
    CHECK(*bandlab::parse_double(ys) == pair.values[idx]);
    if (idx >= bands.valid_from) {
      CHECK(*bandlab::parse_double(cs) == bands.center[idx]);
      CHECK(*bandlab::parse_double(ss) == bands.sigma[idx]);
      CHECK(*bandlab::parse_double(us) == bands.upper[idx]);
      CHECK(*bandlab::parse_double(ls) == bands.lower[idx]);
    } else {
      CHECK(cs.empty());
    }
  }
}

TEST_CASE("bands rejects a window larger than the series") {
  const auto dir = fresh_dir("bands_err");
  const auto r = run_cli("bands " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --n 20 --k 1 --out " + (dir / "o").string(),
                         dir);
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("shorter than window") != std::string::npos);
}

TEST_CASE("backtest ledger matches the audited golden file") {
  const auto dir = fresh_dir("bt");
  const auto r = run_cli("backtest " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --strategy BBPT --n 4 --k 1 --execution idealized --out " +
                             (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "o" / "trades.csv") == slurp(kData / "golden_bbpt_trades.csv"));
  CHECK(r.out.find("strategy:        BBPT") != std::string::npos);
  // machine report exists and names the same trade count
  const auto json_text = slurp(dir / "o" / "report.json");
  CHECK(json_text.find("\"n_trades\": 2") != std::string::npos);
}

TEST_CASE("lagged execution shifts the recorded exit by one bar") {
  const auto dir = fresh_dir("bt_lag");
  const auto r = run_cli("backtest " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --strategy BBPT --n 4 --k 1 --execution lagged --out " +
                             (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  const auto rows = lines_of(slurp(dir / "o" / "trades.csv"));
  REQUIRE(rows.size() == 2);  // header + one trade
  CHECK(rows[1].find("long,2004-01-08,2004-01-09,2004-01-14,") == 0);
}

TEST_CASE("FFMDPT ledger durations never exceed the window") {
  const auto dir = fresh_dir("bt_ff");
  const auto r = run_cli("backtest " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --strategy FFMDPT --n 4 --k 1 --execution idealized --out " +
                             (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  const auto rows = lines_of(slurp(dir / "o" / "trades.csv"));
  REQUIRE(rows.size() >= 2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto last_comma = rows[i].rfind(',');
    CHECK(std::stol(rows[i].substr(last_comma + 1)) <= 4);
  }
}

TEST_CASE("unknown strategy is a usage error") {
  const auto dir = fresh_dir("bt_bad");
  const auto r = run_cli("backtest " + data("dip_z.csv") + " " + data("dip_x.csv") +
                             " --strategy NOPE --n 4 --k 1 --out " + (dir / "o").string(),
                         dir);
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("BBPT|FFMDPT") != std::string::npos);
}

TEST_CASE("compare reports the frozen-forecast edge when it exists") {
  const auto dir = fresh_dir("cmp_slow");
  const auto r = run_cli("compare " + data("slow_z.csv") + " " + data("slow_x.csv") +
                             " --n 4 --k 1 --execution idealized --out " + (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  // slow recovery: FFMDPT waits for the frozen forecast and banks more
  const auto summary = slurp(dir / "o" / "compare.txt");
  const auto pos = summary.find("FFMDPT - BBPT:   ");
  REQUIRE(pos != std::string::npos);
  CHECK(summary[pos + 17] != '-');
  const double diff = std::stod(summary.substr(pos + 17));
  CHECK(diff == doctest::Approx(0.01).epsilon(1e-6));

  const auto dir2 = fresh_dir("cmp_same");
  const auto r2 = run_cli("compare " + data("same_z.csv") + " " + data("same_x.csv") +
                              " --n 4 --k 1 --execution idealized --out " + (dir2 / "o").string(),
                          dir2);
  REQUIRE(r2.exit_code == 0);
  const auto summary2 = slurp(dir2 / "o" / "compare.txt");
  const auto pos2 = summary2.find("FFMDPT - BBPT:   ");
  REQUIRE(pos2 != std::string::npos);
  CHECK(std::stod(summary2.substr(pos2 + 17)) == 0.0);
}

TEST_CASE("optimize runs a plan end to end") {
  // four synthetic years of weekday data around a reverting ratio
  const auto dir = fresh_dir("opt");
  {
    std::ofstream z(dir / "z.csv"), x(dir / "x.csv");
    z << "date,price\n";
    x << "date,price\n";
    std::uint64_t state = 88172645463325252ull;
    auto rnd = [&]() {  // xorshift, uniform-ish in [-1,1]
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return static_cast<double>(static_cast<std::int64_t>(state)) / 9.2e18;
    };
    double level = 0.0;
    using namespace std::chrono;
    sys_days day{year{2003} / 1 / 1};
    const sys_days stop{year{2006} / 12 / 31};
    while (day <= stop) {
      const weekday wd{day};
      if (wd != Saturday && wd != Sunday) {
        level += -0.1 * level + 0.02 * rnd();
        const year_month_day ymd{day};
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()));
        z << buf << ',' << std::exp(level) << "\n";
        x << buf << ",1.0\n";
      }
      day += days{1};
    }
  }
  {
    std::ofstream plan(dir / "plan.txt");
    plan << "k=1.5\nn_grid=5:15\nweighting=mean\nexecution=lagged\n"
            "split=2003-01-01..2003-12-31/2004-01-01..2004-12-31\n"
            "split=2004-01-01..2004-12-31/2005-01-01..2005-12-31\n"
            "split=2005-01-01..2005-12-31/2006-01-01..2006-12-31\n";
  }
  const auto r = run_cli("optimize " + (dir / "z.csv").string() + " " +
                             (dir / "x.csv").string() + " --plan " + (dir / "plan.txt").string() +
                             " --out " + (dir / "o").string(),
                         dir);
  REQUIRE(r.exit_code == 0);
  const auto csv = lines_of(slurp(dir / "o" / "table.csv"));
  REQUIRE(csv.size() == 4);  // header + 3 splits
  CHECK(csv[1].substr(0, 7) == "2003-4,");
  CHECK(csv[3].substr(0, 7) == "2005-6,");
  // diff column equals the difference of the two return columns
  for (std::size_t i = 1; i < csv.size(); ++i) {
    std::istringstream row(csv[i]);
    std::string year, nb, rb, nf, rf, diff;
    std::getline(row, year, ',');
    std::getline(row, nb, ',');
    std::getline(row, rb, ',');
    std::getline(row, nf, ',');
    std::getline(row, rf, ',');
    std::getline(row, diff, ',');
    CHECK(std::abs(std::stod(diff) - (std::stod(rb) - std::stod(rf))) <= 1e-12);
  }
  CHECK(slurp(dir / "o" / "table.txt").find("n_FFMDPT") != std::string::npos);

  // a plan outside the data fails loudly
  {
    std::ofstream plan(dir / "bad_plan.txt");
    plan << "k=1\nn_grid=5:15\nsplit=2011-01-01..2011-12-31/2012-01-01..2012-12-31\n";
  }
  const auto bad = run_cli("optimize " + (dir / "z.csv").string() + " " +
                               (dir / "x.csv").string() + " --plan " +
                               (dir / "bad_plan.txt").string() + " --out " +
                               (dir / "o2").string(),
                           dir);
  CHECK(bad.exit_code != 0);
  CHECK(bad.err.find("no data") != std::string::npos);
}

TEST_CASE("verify exhaustive mode reports gates and violations honestly") {
  const auto dir = fresh_dir("verify_ex");
  const auto r = run_cli("verify --mode exhaustive --max-steps 8 --out " + (dir / "o").string(),
                         dir);
  const auto verdict = slurp(dir / "o" / "verdict.txt");
  CHECK(verdict.find("trades checked:") != std::string::npos);
  CHECK(verdict.find("violations:") != std::string::npos);
  // exit status is nonzero exactly when violations were found
  const bool zero_viols = verdict.find("violations:                0\n") != std::string::npos;
  CHECK(r.exit_code == (zero_viols ? 0 : 1));
}

TEST_CASE("verify montecarlo requires a seed") {
  const auto dir = fresh_dir("verify_seed");
  const auto r = run_cli("verify --mode montecarlo --paths 10 --out " + (dir / "o").string(),
                         dir);
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("seed") != std::string::npos);
}

TEST_CASE("verify montecarlo lagged mode is flagged as out of scope") {
  const auto dir = fresh_dir("verify_lag");
  const auto r = run_cli("verify --mode montecarlo --seed 7 --paths 20 --length 200 "
                         "--execution lagged --out " +
                             (dir / "o").string(),
                         dir);
  (void)r;
  const auto verdict = slurp(dir / "o" / "verdict.txt");
  CHECK(verdict.find("outside the law's assumptions") != std::string::npos);
}

TEST_CASE("modelmap prints the full parameter chain") {
  const auto dir = fresh_dir("mm");
  const auto r = run_cli("modelmap --from q --value 1", dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("q:      1\n") != std::string::npos);
  CHECK(r.out.find("theta:  -0.38196") != std::string::npos);
  CHECK(r.out.find("lambda: 1.38196") != std::string::npos);
  CHECK(r.out.find("n:      0.4472") != std::string::npos);

  const auto r2 = run_cli("modelmap --from n --value 20", dir);
  REQUIRE(r2.exit_code == 0);
  CHECK(r2.out.find("out-of-range") != std::string::npos);  // theta = 19/21 > 0
  CHECK(r2.out.find("n:      20\n") != std::string::npos);

  const auto r3 = run_cli("modelmap --from theta --value 0", dir);
  REQUIRE(r3.exit_code == 0);
  CHECK(r3.out.find("lambda: 1\n") != std::string::npos);
  CHECK(r3.out.find("n:      1\n") != std::string::npos);

  const auto r4 = run_cli("modelmap --from q --value -1", dir);
  CHECK(r4.exit_code != 0);
}

TEST_CASE("reruns with identical inputs produce byte-identical outputs") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  const std::string tail = data("dip_z.csv") + " " + data("dip_x.csv") + " --n 4 --k 1";
  REQUIRE(run_cli("bands " + tail + " --out " + (dir1 / "o").string(), dir1).exit_code == 0);
  REQUIRE(run_cli("bands " + tail + " --out " + (dir2 / "o").string(), dir2).exit_code == 0);
  CHECK(slurp(dir1 / "o" / "bands.csv") == slurp(dir2 / "o" / "bands.csv"));

  const std::string bt = "backtest " + tail + " --strategy FFMDPT --execution lagged";
  REQUIRE(run_cli(bt + " --out " + (dir1 / "b").string(), dir1).exit_code == 0);
  REQUIRE(run_cli(bt + " --out " + (dir2 / "b").string(), dir2).exit_code == 0);
  CHECK(slurp(dir1 / "b" / "trades.csv") == slurp(dir2 / "b" / "trades.csv"));
  CHECK(slurp(dir1 / "b" / "report.json") == slurp(dir2 / "b" / "report.json"));

  const std::string mc = "verify --mode montecarlo --seed 11 --paths 40 --length 250";
  run_cli(mc + " --out " + (dir1 / "v").string(), dir1);
  run_cli(mc + " --out " + (dir2 / "v").string(), dir2);
  CHECK(slurp(dir1 / "v" / "verdict.txt") == slurp(dir2 / "v" / "verdict.txt"));
}
