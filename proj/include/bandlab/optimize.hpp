#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bandlab/engine.hpp"
#include "bandlab/series.hpp"

namespace bandlab {

struct DateRange {
  Date begin;
  Date end;  // inclusive
};

struct SplitSpec {
  DateRange in_sample;
  DateRange out_sample;
};

struct WalkForwardPlan {
  std::vector<SplitSpec> splits;
  double k = 2.0;
  std::vector<Eigen::Index> n_grid;
  Weighting weighting = Weighting::MeanPerTrade;
  Execution execution = Execution::Lagged;
  bool report_percent = true;  // table returns as 100 * log return

  void validate() const;
};

struct GridResult {
  Eigen::Index best_n = 0;
  double best_return = 0.0;
};

// Evaluates the strategy return for every n in the grid at fixed k and
// returns the argmax; ties break toward the smallest n. Every candidate's
// signals start at index max(n_grid)-1 so all windows trade the same dates.
GridResult grid_search(const Eigen::Ref<const Eigen::ArrayXd>& y, Strategy strategy, double k,
                       std::span<const Eigen::Index> n_grid, Weighting weighting,
                       Execution execution);

struct ComparisonRow {
  std::string label;
  Eigen::Index n_bbpt = 0;
  double rtn_bbpt = 0.0;
  Eigen::Index n_ffmdpt = 0;
  double rtn_ffmdpt = 0.0;
  double diff = 0.0;  // rtn_bbpt - rtn_ffmdpt; positive means BBPT led
};

// Per split: optimize each strategy on the in-sample range, run the
// out-of-sample range with its optimal n, emit one row. Out-of-sample runs
// are warmed up with the trailing max(n_grid) observations before the range
// so the first out-of-sample date is tradeable; parameter choice never sees
// out-of-sample data.
std::vector<ComparisonRow> walk_forward(const LogRatioSeries& series,
                                        const WalkForwardPlan& plan);

// Aligned text table: Year, n_BBPT, RTN_BBPT, n_FFMDPT, RTN_FFMDPT, DIFF.
std::string summarize_tables(std::span<const ComparisonRow> rows, double k);

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

// Line-oriented key=value plan format:
//   k=2.0
//   n_grid=10:50          (start:stop[:step], or a comma list)
//   weighting=mean        (mean|sum)
//   execution=lagged      (lagged|idealized)
//   percent=true
//   split=2003-01-01..2003-12-31/2004-01-01..2004-12-31
// '#' starts a comment; one split= line per walk-forward step.
WalkForwardPlan parse_plan(std::istream& in, const std::string& source_name = "<stream>");
WalkForwardPlan load_plan(const std::string& path);

} // namespace bandlab
