#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bandlab/optimize.hpp"

using namespace bandlab;

namespace {

Date d(int y, unsigned m, unsigned day) { return std::chrono::year{y} / m / day; }

// Weekday-dated mean-reverting ratio series spanning [first_year, last_year].
LogRatioSeries ou_series(std::uint64_t seed, int first_year, int last_year) {
  LogRatioSeries out;
  out.numerator_id = "Z";
  out.denominator_id = "X";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> values;
  double level = 0.0;
  auto day = std::chrono::sys_days(d(first_year, 1, 1));
  const auto stop = std::chrono::sys_days(d(last_year, 12, 31));
  while (day <= stop) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
      level += -0.08 * level + noise(rng);
      out.dates.push_back(Date(day));
      values.push_back(level);
    }
    day += std::chrono::days(1);
  }
  out.values = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                static_cast<Eigen::Index>(values.size()));
  return out;
}

WalkForwardPlan three_split_plan() {
  WalkForwardPlan plan;
  plan.k = 1.5;
  for (Eigen::Index n = 5; n <= 15; ++n) plan.n_grid.push_back(n);
  plan.weighting = Weighting::MeanPerTrade;
  plan.execution = Execution::Lagged;
  for (int year = 2003; year <= 2005; ++year)
    plan.splits.push_back(SplitSpec{{d(year, 1, 1), d(year, 12, 31)},
                                    {d(year + 1, 1, 1), d(year + 1, 12, 31)}});
  return plan;
}

} // namespace

TEST_CASE("grid of one value returns that value") {
  const auto series = ou_series(1, 2003, 2003);
  const std::vector<Eigen::Index> grid{12};
  const auto fit = grid_search(series.values, Strategy::BBPT, 1.5, grid,
                               Weighting::MeanPerTrade, Execution::Lagged);
  CHECK(fit.best_n == 12);
}

TEST_CASE("constant series ties break toward the smallest n") {
  const Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(300, 1.0);
  const std::vector<Eigen::Index> grid{10, 11, 12, 20};
  const auto fit = grid_search(flat, Strategy::BBPT, 2.0, grid, Weighting::MeanPerTrade,
                               Execution::Lagged);
  CHECK(fit.best_n == 10);
  CHECK(fit.best_return == 0.0);
}

TEST_CASE("grid_search matches an independently written scan") {
  const auto series = ou_series(99, 2003, 2003);
  std::vector<Eigen::Index> grid;
  for (Eigen::Index n = 5; n <= 20; ++n) grid.push_back(n);

  for (const Strategy strategy : {Strategy::BBPT, Strategy::FFMDPT}) {
    const auto fit = grid_search(series.values, strategy, 1.0, grid, Weighting::MeanPerTrade,
                                 Execution::Lagged);
    // brute force, written out separately
    Eigen::Index best_n = -1;
    double best_ret = 0.0;
    for (const Eigen::Index n : grid) {
      EngineConfig config;
      config.params = BandParams{n, 1.0};
      config.strategy = strategy;
      config.execution = Execution::Lagged;
      config.min_signal_index = 19;  // common first signal bar: max(grid) - 1
      const auto report = run_strategy(series.values, config);
      if (best_n < 0 || report.strategy_return.value > best_ret) {
        best_n = n;
        best_ret = report.strategy_return.value;
      }
    }
    CHECK(fit.best_n == best_n);
    CHECK(fit.best_return == best_ret);

    // the argmax does not depend on evaluation order
    std::vector<Eigen::Index> reversed(grid.rbegin(), grid.rend());
    const auto back = grid_search(series.values, strategy, 1.0, reversed,
                                  Weighting::MeanPerTrade, Execution::Lagged);
    CHECK(back.best_n == fit.best_n);
    CHECK(back.best_return == fit.best_return);
  }
}

TEST_CASE("in-sample shorter than the largest window is an error") {
  const std::vector<Eigen::Index> grid{10, 50};
  const Eigen::ArrayXd small = Eigen::ArrayXd::Constant(30, 1.0);
  CHECK_THROWS_WITH_AS(grid_search(small, Strategy::BBPT, 1.0, grid, Weighting::MeanPerTrade,
                                   Execution::Lagged),
                       doctest::Contains("in-sample too short"), std::invalid_argument);
}

TEST_CASE("plan parsing") {
  std::istringstream in(
      "# walk-forward setup\n"
      "k=1.5\n"
      "n_grid=10:50\n"
      "weighting=sum\n"
      "execution=idealized\n"
      "percent=false\n"
      "split=2003-01-01..2003-12-31/2004-01-01..2004-12-31\n"
      "split=2004-01-01..2004-12-31/2005-01-01..2005-12-31\n");
  const auto plan = parse_plan(in, "plan.txt");
  CHECK(plan.k == 1.5);
  CHECK(plan.n_grid.size() == 41);
  CHECK(plan.n_grid.front() == 10);
  CHECK(plan.n_grid.back() == 50);
  CHECK(plan.weighting == Weighting::Sum);
  CHECK(plan.execution == Execution::Idealized);
  CHECK_FALSE(plan.report_percent);
  REQUIRE(plan.splits.size() == 2);
  CHECK(plan.splits[0].in_sample.begin == d(2003, 1, 1));
  CHECK(plan.splits[1].out_sample.end == d(2005, 12, 31));

  std::istringstream stepped("k=1\nn_grid=10:50:5\nsplit=2003-01-01..2003-12-31/2004-01-01..2004-12-31\n");
  CHECK(parse_plan(stepped).n_grid == std::vector<Eigen::Index>{10, 15, 20, 25, 30, 35, 40, 45, 50});

  std::istringstream listed("k=1\nn_grid=12, 14, 20\nsplit=2003-01-01..2003-12-31/2004-01-01..2004-12-31\n");
  CHECK(parse_plan(listed).n_grid == std::vector<Eigen::Index>{12, 14, 20});
}

TEST_CASE("plan errors carry line numbers and constraints") {
  std::istringstream bad_key("nonsense=1\n");
  CHECK_THROWS_WITH_AS(parse_plan(bad_key, "p.txt"), doctest::Contains("p.txt:1"),
                       std::runtime_error);

  std::istringstream bad_range("split=2003-01-01:2003-12-31\n");
  CHECK_THROWS(parse_plan(bad_range));

  std::istringstream no_split("k=1\nn_grid=10:20\n");
  CHECK_THROWS_WITH_AS(parse_plan(no_split), doctest::Contains("no splits"), std::runtime_error);

  std::istringstream overlap(
      "k=1\nn_grid=10:20\nsplit=2003-01-01..2004-06-30/2004-01-01..2004-12-31\n");
  CHECK_THROWS_WITH_AS(parse_plan(overlap), doctest::Contains("precede"), std::runtime_error);

  std::istringstream inverted(
      "k=1\nn_grid=10:20\nsplit=2003-12-31..2003-01-01/2004-01-01..2004-12-31\n");
  CHECK_THROWS(parse_plan(inverted));
}

TEST_CASE("walk_forward emits one row per split with exact diff bookkeeping") {
  const auto series = ou_series(7, 2003, 2006);
  const auto plan = three_split_plan();
  const auto rows = walk_forward(series, plan);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "2003-4");
  CHECK(rows[1].label == "2004-5");
  CHECK(rows[2].label == "2005-6");
  for (const auto& row : rows) {
    CHECK(row.diff == row.rtn_bbpt - row.rtn_ffmdpt);  // computed by subtraction, exact
    CHECK(std::abs(row.diff - (row.rtn_bbpt - row.rtn_ffmdpt)) <= 1e-12);
    CHECK(row.n_bbpt >= 5);
    CHECK(row.n_bbpt <= 15);
    CHECK(row.n_ffmdpt >= 5);
    CHECK(row.n_ffmdpt <= 15);
  }
}

TEST_CASE("out-of-sample data never influences the chosen window") {
  const auto series = ou_series(21, 2003, 2004);
  WalkForwardPlan plan = three_split_plan();
  plan.splits = {SplitSpec{{d(2003, 1, 1), d(2003, 12, 31)}, {d(2004, 1, 1), d(2004, 12, 31)}}};

  const auto base = walk_forward(series, plan);

  LogRatioSeries perturbed = series;
  std::mt19937_64 rng(5150);
  std::normal_distribution<double> bump(0.0, 0.05);
  for (std::size_t i = 0; i < perturbed.dates.size(); ++i)
    if (perturbed.dates[i] >= d(2004, 1, 1))
      perturbed.values[static_cast<Eigen::Index>(i)] += bump(rng);

  const auto moved = walk_forward(perturbed, plan);
  REQUIRE(base.size() == 1);
  REQUIRE(moved.size() == 1);
  CHECK(base[0].n_bbpt == moved[0].n_bbpt);
  CHECK(base[0].n_ffmdpt == moved[0].n_ffmdpt);
}

TEST_CASE("single-candidate plans degenerate to a direct backtest") {
  const auto series = ou_series(33, 2003, 2004);
  WalkForwardPlan plan;
  plan.k = 2.0;
  plan.n_grid = {10};
  plan.report_percent = false;
  plan.splits = {SplitSpec{{d(2003, 1, 1), d(2003, 12, 31)}, {d(2004, 1, 1), d(2004, 12, 31)}}};
  const auto rows = walk_forward(series, plan);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n_bbpt == 10);
  CHECK(rows[0].n_ffmdpt == 10);

  // same numbers as running the strategy directly over the warmed slice
  std::size_t os_begin = 0;
  while (series.dates[os_begin] < d(2004, 1, 1)) ++os_begin;
  const auto slice = series.values.segment(static_cast<Eigen::Index>(os_begin) - 10,
                                           series.values.size() -
                                               static_cast<Eigen::Index>(os_begin) + 10);
  EngineConfig config;
  config.params = BandParams{10, 2.0};
  config.strategy = Strategy::BBPT;
  config.execution = plan.execution;
  config.min_signal_index = 10;
  const auto direct = run_strategy(slice, config);
  CHECK(rows[0].rtn_bbpt == direct.strategy_return.value);
}

TEST_CASE("table rendering matches the published comparison format") {
  std::vector<ComparisonRow> rows;
  rows.push_back({"2003-4", 13, 1.491, 11, -1.930, 3.4210});
  rows.push_back({"2005-6", 14, 9.534, 16, 9.301, 0.2330});
  const std::string table = summarize_tables(rows, 1.0);

  CHECK(table.find("Year") != std::string::npos);
  CHECK(table.find("n_BBPT") != std::string::npos);
  CHECK(table.find("RTN_FFMDPT") != std::string::npos);
  CHECK(table.find("DIFF") != std::string::npos);
  CHECK(table.find("2003-4") != std::string::npos);
  CHECK(table.find("1.4910") != std::string::npos);
  CHECK(table.find("-1.9300") != std::string::npos);
  CHECK(table.find("3.4210") != std::string::npos);  // positive: BBPT led
  CHECK(table.find("0.2330") != std::string::npos);

  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "year,n_bbpt,rtn_bbpt,n_ffmdpt,rtn_ffmdpt,diff");
  std::getline(lines, line);
  CHECK(line == "2003-4,13,1.491,11,-1.93,3.421");

  // csv parses back losslessly
  const auto diff = parse_double(line.substr(line.rfind(',') + 1));
  REQUIRE(diff.has_value());
  CHECK(*diff == rows[0].diff);
}

TEST_CASE("splits referencing missing data fail") {
  const auto series = ou_series(3, 2003, 2004);
  WalkForwardPlan plan;
  plan.k = 1.0;
  plan.n_grid = {10};
  plan.splits = {SplitSpec{{d(2007, 1, 1), d(2007, 12, 31)}, {d(2008, 1, 1), d(2008, 12, 31)}}};
  CHECK_THROWS_WITH_AS(walk_forward(series, plan), doctest::Contains("no data"),
                       std::runtime_error);
}
