#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandlab/rolling.hpp"
#include "bandlab/series.hpp"

namespace bandlab {

enum class Side { Long, Short };
enum class Strategy { BBPT, FFMDPT };
enum class Execution { Lagged, Idealized };
enum class Weighting { MeanPerTrade, Sum };
enum class ExitReason { CenterCross, FixedForecastCross, MaxDuration, EndOfData };

std::string to_string(Side s);
std::string to_string(Strategy s);
std::string to_string(Execution e);
std::string to_string(Weighting w);
std::string to_string(ExitReason r);

struct Trade {
  Side side = Side::Long;
  Eigen::Index signal_index = 0;
  Eigen::Index entry_index = 0;
  Eigen::Index exit_index = 0;
  double entry_y = 0.0;
  double exit_y = 0.0;
  ExitReason exit_reason = ExitReason::CenterCross;
  double log_return = 0.0;
  Eigen::Index duration = 0;  // exit_index - entry_index + 1
  // No trade completed in the n bars before entry. Return-duration
  // assertions are gated on this flag.
  bool clean_lookback = true;
};

struct EngineConfig {
  BandParams params;
  Execution execution = Execution::Lagged;
  Strategy strategy = Strategy::BBPT;
  Weighting weighting = Weighting::MeanPerTrade;
  // First index allowed to signal; -1 means the first defined band index.
  // The optimizer uses this to start every grid candidate at a common date.
  Eigen::Index min_signal_index = -1;
};

struct DurationStats {
  std::optional<double> avg_win;
  std::optional<double> avg_loss;
  int n_wins = 0;
  int n_losses = 0;
};

struct StrategyReturn {
  double value = 0.0;
  bool has_trades = false;
};

struct BacktestReport {
  std::vector<Trade> trades;
  StrategyReturn strategy_return;
  DurationStats durations;
  EngineConfig config;
};

// Entry side implied by a band touch/cross at one index: at or above the
// upper arm signals short, at or below the lower arm signals long. A
// zero-width band (upper == lower == y) signals nothing; either side would
// be arbitrary there and y -> -y symmetry would break.
std::optional<Side> signal_side(double y, double center, double sigma, double k);

struct Signal {
  Eigen::Index index;
  Side side;
};

// Band touch/cross signals at indices where no position is open. in_position
// must cover every index of y; no signals in the undefined band region.
std::vector<Signal> generate_signals(const Eigen::Ref<const Eigen::ArrayXd>& y,
                                     const BandSet& bands,
                                     const Eigen::Array<bool, Eigen::Dynamic, 1>& in_position);

// Shared rule engine over precomputed center/sigma. Entry executes one bar
// after the signal at that bar's value in both modes. Idealized mode exits at
// the exit-signal bar itself (instantaneous end-of-block exit); lagged mode
// exits one bar after the exit signal. Appends closed trades to `out` and
// returns the number appended. Allocation-free once `out` has capacity.
std::size_t run_pair_rules(std::span<const double> y, std::span<const double> center,
                           std::span<const double> sigma, const EngineConfig& config,
                           std::vector<Trade>& out);

BacktestReport run_bbpt(const Eigen::Ref<const Eigen::ArrayXd>& y, const EngineConfig& config);
BacktestReport run_ffmdpt(const Eigen::Ref<const Eigen::ArrayXd>& y, const EngineConfig& config);
BacktestReport run_strategy(const Eigen::Ref<const Eigen::ArrayXd>& y, const EngineConfig& config);

// MeanPerTrade: mean of trade log returns (each trade weight 1/count).
// Sum: plain sum. Empty ledger reports value 0 with has_trades = false.
StrategyReturn strategy_return(std::span<const Trade> trades, Weighting weighting);

// Zero log return counts as a win. Empty classes stay unset, never zero.
DurationStats duration_stats(std::span<const Trade> trades);

// `side,signal_date,entry_date,exit_date,entry_y,exit_y,exit_reason,log_return,duration`
void write_trade_csv(std::ostream& out, const LogRatioSeries& series,
                     std::span<const Trade> trades);

} // namespace bandlab
