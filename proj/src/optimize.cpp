#include "bandlab/optimize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bandlab {
namespace {

Eigen::Index max_window(std::span<const Eigen::Index> n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("n_grid must be non-empty");
  return *std::max_element(n_grid.begin(), n_grid.end());
}

// First index with date >= d (dates sorted ascending).
std::size_t lower_bound_date(const std::vector<Date>& dates, const Date& d) {
  return static_cast<std::size_t>(
      std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
}

// One past the last index with date <= d.
std::size_t upper_bound_date(const std::vector<Date>& dates, const Date& d) {
  return static_cast<std::size_t>(
      std::upper_bound(dates.begin(), dates.end(), d) - dates.begin());
}

// "2003"/"2004" -> "2003-4", "2009"/"2010" -> "2009-10".
std::string split_label(const Date& in_begin, const Date& out_begin) {
  const std::string a = std::to_string(static_cast<int>(in_begin.year()));
  const std::string b = std::to_string(static_cast<int>(out_begin.year()));
  std::size_t common = 0;
  while (common < a.size() && common < b.size() && a[common] == b[common]) ++common;
  if (common == b.size()) common = b.size() - 1;  // identical years: keep last digit
  return a + "-" + b.substr(common);
}

} // namespace

void WalkForwardPlan::validate() const {
  if (splits.empty()) throw std::invalid_argument("plan has no splits");
  if (n_grid.empty()) throw std::invalid_argument("plan has an empty n grid");
  if (!(k > 0.0)) throw std::invalid_argument("plan k must be > 0");
  for (const auto& n : n_grid)
    if (n < 2) throw std::invalid_argument("plan n grid values must be >= 2");
  for (const auto& s : splits) {
    if (s.in_sample.end < s.in_sample.begin || s.out_sample.end < s.out_sample.begin)
      throw std::invalid_argument("plan split has an inverted date range");
    if (!(s.in_sample.end < s.out_sample.begin))
      throw std::invalid_argument("plan split in-sample must precede out-of-sample");
  }
}

GridResult grid_search(const Eigen::Ref<const Eigen::ArrayXd>& y, Strategy strategy, double k,
                       std::span<const Eigen::Index> n_grid, Weighting weighting,
                       Execution execution) {
  const Eigen::Index n_max = max_window(n_grid);
  if (y.size() < n_max)
    throw std::invalid_argument("in-sample too short: " + std::to_string(y.size()) +
                                " observations for max window " + std::to_string(n_max));

  GridResult best;
  bool have = false;
  for (const Eigen::Index n : n_grid) {
    EngineConfig config;
    config.params = BandParams{n, k};
    config.strategy = strategy;
    config.weighting = weighting;
    config.execution = execution;
    config.min_signal_index = n_max - 1;  // every candidate trades the same dates
    const BacktestReport report = run_strategy(y, config);
    const double value = report.strategy_return.value;
    // ties break toward the smallest n; grid order is ascending by caller
    // convention, but compare explicitly so any order yields the same result
    if (!have || value > best.best_return ||
        (value == best.best_return && n < best.best_n)) {
      best = {n, value};
      have = true;
    }
  }
  return best;
}

std::vector<ComparisonRow> walk_forward(const LogRatioSeries& series,
                                        const WalkForwardPlan& plan) {
  plan.validate();
  const Eigen::Index n_max = max_window(plan.n_grid);
  std::vector<ComparisonRow> rows;
  rows.reserve(plan.splits.size());

  for (const auto& split : plan.splits) {
    const std::size_t is_begin = lower_bound_date(series.dates, split.in_sample.begin);
    const std::size_t is_end = upper_bound_date(series.dates, split.in_sample.end);
    const std::size_t os_begin = lower_bound_date(series.dates, split.out_sample.begin);
    const std::size_t os_end = upper_bound_date(series.dates, split.out_sample.end);
    const std::string label = split_label(split.in_sample.begin, split.out_sample.begin);

    if (is_end <= is_begin || os_end <= os_begin)
      throw std::runtime_error("split " + label + ": no data in range");
    const auto is_len = static_cast<Eigen::Index>(is_end - is_begin);
    if (is_len < n_max)
      throw std::runtime_error("split " + label + ": in-sample has " + std::to_string(is_len) +
                               " observations, need >= " + std::to_string(n_max));
    if (static_cast<Eigen::Index>(os_begin) < n_max)
      throw std::runtime_error("split " + label + ": not enough history before out-of-sample " +
                               "start to warm up bands");

    const auto in_values =
        series.values.segment(static_cast<Eigen::Index>(is_begin), is_len);

    ComparisonRow row;
    row.label = label;

    // Out-of-sample runs see the trailing n_max observations as warm-up so
    // the first out-of-sample date is tradeable; signals start at the range.
    const std::size_t warm_begin = os_begin - static_cast<std::size_t>(n_max);
    const auto out_values = series.values.segment(
        static_cast<Eigen::Index>(warm_begin), static_cast<Eigen::Index>(os_end - warm_begin));

    for (const Strategy strategy : {Strategy::BBPT, Strategy::FFMDPT}) {
      const GridResult fit = grid_search(in_values, strategy, plan.k, plan.n_grid,
                                         plan.weighting, plan.execution);
      EngineConfig config;
      config.params = BandParams{fit.best_n, plan.k};
      config.strategy = strategy;
      config.weighting = plan.weighting;
      config.execution = plan.execution;
      config.min_signal_index = n_max;  // first out-of-sample index in the warm slice
      const BacktestReport report = run_strategy(out_values, config);
      const double scale = plan.report_percent ? 100.0 : 1.0;
      if (strategy == Strategy::BBPT) {
        row.n_bbpt = fit.best_n;
        row.rtn_bbpt = scale * report.strategy_return.value;
      } else {
        row.n_ffmdpt = fit.best_n;
        row.rtn_ffmdpt = scale * report.strategy_return.value;
      }
    }
    row.diff = row.rtn_bbpt - row.rtn_ffmdpt;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summarize_tables(std::span<const ComparisonRow> rows, double k) {
  std::ostringstream out;
  char line[160];
  out << "Return comparison, BBPT vs FFMDPT, k = " << format_double(k)
      << " with n optimized per split\n";
  std::snprintf(line, sizeof(line), "%-10s %8s %12s %10s %12s %10s\n", "Year", "n_BBPT",
                "RTN_BBPT", "n_FFMDPT", "RTN_FFMDPT", "DIFF");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %8lld %12.4f %10lld %12.4f %10.4f\n",
                  r.label.c_str(), static_cast<long long>(r.n_bbpt), r.rtn_bbpt,
                  static_cast<long long>(r.n_ffmdpt), r.rtn_ffmdpt, r.diff);
    out << line;
  }
  return out.str();
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "year,n_bbpt,rtn_bbpt,n_ffmdpt,rtn_ffmdpt,diff\n";
  for (const auto& r : rows)
    out << r.label << ',' << r.n_bbpt << ',' << format_double(r.rtn_bbpt) << ',' << r.n_ffmdpt
        << ',' << format_double(r.rtn_ffmdpt) << ',' << format_double(r.diff) << '\n';
}

namespace {

[[noreturn]] void plan_fail(const std::string& source, std::size_t line_no,
                            const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + what);
}

std::string strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return std::string(s);
}

std::vector<Eigen::Index> parse_grid(const std::string& text) {
  std::vector<Eigen::Index> grid;
  if (text.find(':') != std::string::npos) {
    long start = 0, stop = 0, step = 1;
    const int got = std::sscanf(text.c_str(), "%ld:%ld:%ld", &start, &stop, &step);
    if (got < 2 || step < 1 || stop < start) throw std::runtime_error("bad n_grid `" + text + "`");
    for (long n = start; n <= stop; n += step) grid.push_back(n);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string s = strip(item);
      if (s.empty()) continue;
      grid.push_back(std::stol(s));
    }
  }
  if (grid.empty()) throw std::runtime_error("bad n_grid `" + text + "`");
  return grid;
}

DateRange parse_range(const std::string& text) {
  const auto sep = text.find("..");
  if (sep == std::string::npos) throw std::runtime_error("bad date range `" + text + "`");
  const auto begin = parse_date(strip(std::string_view(text).substr(0, sep)));
  const auto end = parse_date(strip(std::string_view(text).substr(sep + 2)));
  if (!begin || !end) throw std::runtime_error("bad date range `" + text + "`");
  return {*begin, *end};
}

} // namespace

WalkForwardPlan parse_plan(std::istream& in, const std::string& source_name) {
  WalkForwardPlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string content = strip(line);
    const auto hash = content.find('#');
    if (hash != std::string::npos) content = strip(std::string_view(content).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) plan_fail(source_name, line_no, "expected key=value");
    const std::string key = strip(std::string_view(content).substr(0, eq));
    const std::string value = strip(std::string_view(content).substr(eq + 1));
    try {
      if (key == "k") {
        const auto k = parse_double(value);
        if (!k) throw std::runtime_error("bad k `" + value + "`");
        plan.k = *k;
      } else if (key == "n_grid") {
        plan.n_grid = parse_grid(value);
      } else if (key == "weighting") {
        if (value == "mean") plan.weighting = Weighting::MeanPerTrade;
        else if (value == "sum") plan.weighting = Weighting::Sum;
        else throw std::runtime_error("weighting must be mean|sum, got `" + value + "`");
      } else if (key == "execution") {
        if (value == "lagged") plan.execution = Execution::Lagged;
        else if (value == "idealized") plan.execution = Execution::Idealized;
        else throw std::runtime_error("execution must be lagged|idealized, got `" + value + "`");
      } else if (key == "percent") {
        if (value == "true") plan.report_percent = true;
        else if (value == "false") plan.report_percent = false;
        else throw std::runtime_error("percent must be true|false, got `" + value + "`");
      } else if (key == "split") {
        const auto slash = value.find('/');
        if (slash == std::string::npos)
          throw std::runtime_error("split needs IN_RANGE/OUT_RANGE, got `" + value + "`");
        SplitSpec split;
        split.in_sample = parse_range(strip(std::string_view(value).substr(0, slash)));
        split.out_sample = parse_range(strip(std::string_view(value).substr(slash + 1)));
        plan.splits.push_back(split);
      } else {
        throw std::runtime_error("unknown key `" + key + "`");
      }
    } catch (const std::runtime_error& e) {
      plan_fail(source_name, line_no, e.what());
    }
  }
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(source_name + ": " + e.what());
  }
  return plan;
}

WalkForwardPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_plan(in, path);
}

} // namespace bandlab
