#include "bandlab/engine.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bandlab {

std::string to_string(Side s) { return s == Side::Long ? "long" : "short"; }
std::string to_string(Strategy s) { return s == Strategy::BBPT ? "BBPT" : "FFMDPT"; }
std::string to_string(Execution e) { return e == Execution::Lagged ? "lagged" : "idealized"; }
std::string to_string(Weighting w) { return w == Weighting::MeanPerTrade ? "mean" : "sum"; }

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::CenterCross: return "center-cross";
    case ExitReason::FixedForecastCross: return "fixed-forecast-cross";
    case ExitReason::MaxDuration: return "max-duration";
    case ExitReason::EndOfData: return "end-of-data";
  }
  return "?";
}

std::optional<Side> signal_side(double y, double center, double sigma, double k) {
  const double upper = center + k * sigma;
  const double lower = center - k * sigma;
  if (upper == lower) return std::nullopt;
  if (y >= upper) return Side::Short;
  if (y <= lower) return Side::Long;
  return std::nullopt;
}

std::vector<Signal> generate_signals(const Eigen::Ref<const Eigen::ArrayXd>& y,
                                     const BandSet& bands,
                                     const Eigen::Array<bool, Eigen::Dynamic, 1>& in_position) {
  if (y.size() != bands.center.size() || y.size() != in_position.size())
    throw std::invalid_argument("generate_signals: length mismatch");
  std::vector<Signal> signals;
  for (Eigen::Index i = bands.valid_from; i < y.size(); ++i) {
    if (in_position[i]) continue;
    if (const auto side = signal_side(y[i], bands.center[i], bands.sigma[i], bands.params.k))
      signals.push_back({i, *side});
  }
  return signals;
}

namespace {

struct Exit {
  Eigen::Index index;
  ExitReason reason;
};

inline bool center_hit(Side side, double y, double center) {
  return side == Side::Long ? y >= center : y <= center;
}

Exit find_exit(std::span<const double> y, std::span<const double> center, Side side,
               Eigen::Index entry, const EngineConfig& config) {
  const auto len = static_cast<Eigen::Index>(y.size());
  const Eigen::Index last = len - 1;

  if (config.strategy == Strategy::BBPT) {
    if (config.execution == Execution::Idealized) {
      for (Eigen::Index j = entry + 1; j < len; ++j)
        if (center_hit(side, y[j], center[j])) return {j, ExitReason::CenterCross};
    } else {
      for (Eigen::Index j = entry; j < len; ++j)
        if (center_hit(side, y[j], center[j])) {
          if (j + 1 < len) return {j + 1, ExitReason::CenterCross};
          break;  // exit signal on the last bar cannot execute
        }
    }
    return {last, ExitReason::EndOfData};
  }

  // FFMDPT: the reversion target is frozen at the entry-bar center line and
  // the trade never runs past duration n.
  const double forecast = center[entry];
  const Eigen::Index last_allowed = entry + config.params.n - 1;
  if (config.execution == Execution::Idealized) {
    const Eigen::Index scan_end = std::min(last_allowed, last);
    for (Eigen::Index j = entry + 1; j <= scan_end; ++j)
      if (center_hit(side, y[j], forecast)) return {j, ExitReason::FixedForecastCross};
  } else {
    const Eigen::Index signal_end = std::min(last_allowed - 1, len - 2);
    for (Eigen::Index j = entry; j <= signal_end; ++j)
      if (center_hit(side, y[j], forecast)) return {j + 1, ExitReason::FixedForecastCross};
  }
  if (last_allowed <= last) return {last_allowed, ExitReason::MaxDuration};
  return {last, ExitReason::EndOfData};
}

} // namespace

std::size_t run_pair_rules(std::span<const double> y, std::span<const double> center,
                           std::span<const double> sigma, const EngineConfig& config,
                           std::vector<Trade>& out) {
  config.params.validate();
  const auto len = static_cast<Eigen::Index>(y.size());
  if (len != static_cast<Eigen::Index>(center.size()) ||
      len != static_cast<Eigen::Index>(sigma.size()))
    throw std::invalid_argument("run_pair_rules: length mismatch");
  const Eigen::Index n = config.params.n;
  if (len < n) throw std::invalid_argument("run_pair_rules: series shorter than window");

  const Eigen::Index first_signal = std::max(n - 1, config.min_signal_index);
  std::size_t appended = 0;
  Eigen::Index prev_exit = -1;  // most recent completed exit in this run

  Eigen::Index i = first_signal;
  while (i < len) {
    const auto side = signal_side(y[i], center[i], sigma[i], config.params.k);
    if (!side) {
      ++i;
      continue;
    }
    const Eigen::Index entry = i + 1;
    if (entry >= len) break;  // signal on the last bar never becomes a trade

    Trade trade;
    trade.side = *side;
    trade.signal_index = i;
    trade.entry_index = entry;
    trade.entry_y = y[entry];
    trade.clean_lookback = prev_exit < entry - n;

    const Exit exit = find_exit(y, center, *side, entry, config);
    trade.exit_index = exit.index;
    trade.exit_reason = exit.reason;
    trade.exit_y = y[exit.index];
    trade.duration = exit.index - entry + 1;
    const double move = trade.exit_y - trade.entry_y;
    trade.log_return = (trade.side == Side::Long ? move : -move) + 0.0;  // no -0.0

    out.push_back(trade);
    ++appended;
    prev_exit = trade.exit_index;
    i = trade.exit_index;  // signals are evaluated on the exit bar
  }
  return appended;
}

BacktestReport run_strategy(const Eigen::Ref<const Eigen::ArrayXd>& y,
                            const EngineConfig& config) {
  config.params.validate();
  const Eigen::ArrayXd center = rolling_mean(y, config.params.n);
  const Eigen::ArrayXd sigma = rolling_std(y, config.params.n);

  BacktestReport report;
  report.config = config;
  run_pair_rules({y.data(), static_cast<std::size_t>(y.size())},
                 {center.data(), static_cast<std::size_t>(center.size())},
                 {sigma.data(), static_cast<std::size_t>(sigma.size())}, config, report.trades);
  report.strategy_return = strategy_return(report.trades, config.weighting);
  report.durations = duration_stats(report.trades);
  return report;
}

BacktestReport run_bbpt(const Eigen::Ref<const Eigen::ArrayXd>& y, const EngineConfig& config) {
  EngineConfig c = config;
  c.strategy = Strategy::BBPT;
  return run_strategy(y, c);
}

BacktestReport run_ffmdpt(const Eigen::Ref<const Eigen::ArrayXd>& y, const EngineConfig& config) {
  EngineConfig c = config;
  c.strategy = Strategy::FFMDPT;
  return run_strategy(y, c);
}

StrategyReturn strategy_return(std::span<const Trade> trades, Weighting weighting) {
  StrategyReturn result;
  if (trades.empty()) return result;  // 0 with the empty flag
  result.has_trades = true;
  double sum = 0.0;
  for (const Trade& t : trades) sum += t.log_return;
  result.value =
      weighting == Weighting::Sum ? sum : sum / static_cast<double>(trades.size());
  return result;
}

DurationStats duration_stats(std::span<const Trade> trades) {
  DurationStats stats;
  double win_sum = 0.0, loss_sum = 0.0;
  for (const Trade& t : trades) {
    if (t.log_return >= 0.0) {
      win_sum += static_cast<double>(t.duration);
      ++stats.n_wins;
    } else {
      loss_sum += static_cast<double>(t.duration);
      ++stats.n_losses;
    }
  }
  if (stats.n_wins > 0) stats.avg_win = win_sum / stats.n_wins;
  if (stats.n_losses > 0) stats.avg_loss = loss_sum / stats.n_losses;
  return stats;
}

void write_trade_csv(std::ostream& out, const LogRatioSeries& series,
                     std::span<const Trade> trades) {
  out << "side,signal_date,entry_date,exit_date,entry_y,exit_y,exit_reason,log_return,duration\n";
  for (const Trade& t : trades) {
    out << to_string(t.side) << ','
        << format_date(series.dates[static_cast<std::size_t>(t.signal_index)]) << ','
        << format_date(series.dates[static_cast<std::size_t>(t.entry_index)]) << ','
        << format_date(series.dates[static_cast<std::size_t>(t.exit_index)]) << ','
        << format_double(t.entry_y) << ',' << format_double(t.exit_y) << ','
        << to_string(t.exit_reason) << ',' << format_double(t.log_return) << ',' << t.duration
        << '\n';
  }
}

} // namespace bandlab
