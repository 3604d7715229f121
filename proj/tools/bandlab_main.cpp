// Command-line front end: band computation, pair backtests, strategy
// comparison, walk-forward optimization, return-duration verification and
// the model parameter chain. All outputs are plain data files; reruns with
// identical inputs and seed are byte-identical.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "bandlab/engine.hpp"
#include "bandlab/models.hpp"
#include "bandlab/optimize.hpp"
#include "bandlab/rolling.hpp"
#include "bandlab/series.hpp"
#include "bandlab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string z_path;
  std::string x_path;
  std::string out_dir;
  long n = 20;
  double k = 2.0;
  std::string execution = "lagged";
  std::string weighting = "mean";
};

bandlab::Execution parse_execution(const std::string& s) {
  if (s == "lagged") return bandlab::Execution::Lagged;
  if (s == "idealized") return bandlab::Execution::Idealized;
  throw CLI::ValidationError("--execution", "must be lagged|idealized");
}

bandlab::Weighting parse_weighting(const std::string& s) {
  if (s == "mean") return bandlab::Weighting::MeanPerTrade;
  if (s == "sum") return bandlab::Weighting::Sum;
  throw CLI::ValidationError("--weighting", "must be mean|sum");
}

bandlab::LogRatioSeries load_pair(const CommonOpts& opts) {
  const auto z = bandlab::load_price_csv(opts.z_path, fs::path(opts.z_path).stem().string());
  const auto x = bandlab::load_price_csv(opts.x_path, fs::path(opts.x_path).stem().string());
  return bandlab::align_pair(z, x);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json report_json(const bandlab::BacktestReport& report, const bandlab::LogRatioSeries& series) {
  json j;
  j["strategy"] = to_string(report.config.strategy);
  j["execution"] = to_string(report.config.execution);
  j["weighting"] = to_string(report.config.weighting);
  j["n"] = report.config.params.n;
  j["k"] = report.config.params.k;
  j["pair"] = series.numerator_id + "/" + series.denominator_id;
  j["n_trades"] = report.trades.size();
  j["has_trades"] = report.strategy_return.has_trades;
  j["strategy_return"] = report.strategy_return.value;
  j["strategy_return_pct"] = 100.0 * report.strategy_return.value;
  j["n_wins"] = report.durations.n_wins;
  j["n_losses"] = report.durations.n_losses;
  j["avg_win_duration"] =
      report.durations.avg_win ? json(*report.durations.avg_win) : json(nullptr);
  j["avg_loss_duration"] =
      report.durations.avg_loss ? json(*report.durations.avg_loss) : json(nullptr);
  return j;
}

void write_report_text(std::ostream& out, const bandlab::BacktestReport& report,
                       const bandlab::LogRatioSeries& series) {
  out << "pair:            " << series.numerator_id << "/" << series.denominator_id << "\n"
      << "strategy:        " << to_string(report.config.strategy) << "\n"
      << "execution:       " << to_string(report.config.execution) << "\n"
      << "n:               " << report.config.params.n << "\n"
      << "k:               " << bandlab::format_double(report.config.params.k) << "\n"
      << "trades:          " << report.trades.size() << "\n"
      << "strategy return: " << bandlab::format_double(report.strategy_return.value) << " ("
      << to_string(report.config.weighting) << " weighting, "
      << bandlab::format_double(100.0 * report.strategy_return.value) << "%)\n"
      << "wins/losses:     " << report.durations.n_wins << "/" << report.durations.n_losses
      << "\n"
      << "avg win duration:  "
      << (report.durations.avg_win ? bandlab::format_double(*report.durations.avg_win) : "n/a")
      << "\n"
      << "avg loss duration: "
      << (report.durations.avg_loss ? bandlab::format_double(*report.durations.avg_loss)
                                    : "n/a")
      << "\n";
}

int cmd_bands(const CommonOpts& opts) {
  const auto pair = load_pair(opts);
  const auto bands = bandlab::bollinger_bands(pair.values, bandlab::BandParams{opts.n, opts.k});
  auto out = open_out(opts.out_dir, "bands.csv");
  bandlab::write_band_csv(out, pair, bands);
  std::cout << "wrote " << (fs::path(opts.out_dir) / "bands.csv").string() << " ("
            << pair.size() << " rows)\n";
  return 0;
}

int cmd_backtest(const CommonOpts& opts, const std::string& strategy_name) {
  bandlab::EngineConfig config;
  config.params = bandlab::BandParams{opts.n, opts.k};
  config.execution = parse_execution(opts.execution);
  config.weighting = parse_weighting(opts.weighting);
  if (strategy_name == "BBPT") config.strategy = bandlab::Strategy::BBPT;
  else if (strategy_name == "FFMDPT") config.strategy = bandlab::Strategy::FFMDPT;
  else throw CLI::ValidationError("--strategy", "must be BBPT|FFMDPT");

  const auto pair = load_pair(opts);
  const auto report = bandlab::run_strategy(pair.values, config);

  auto trades_out = open_out(opts.out_dir, "trades.csv");
  bandlab::write_trade_csv(trades_out, pair, report.trades);
  auto text_out = open_out(opts.out_dir, "report.txt");
  write_report_text(text_out, report, pair);
  auto json_out = open_out(opts.out_dir, "report.json");
  json_out << report_json(report, pair).dump(2) << "\n";

  write_report_text(std::cout, report, pair);
  return 0;
}

int cmd_compare(const CommonOpts& opts) {
  bandlab::EngineConfig config;
  config.params = bandlab::BandParams{opts.n, opts.k};
  config.execution = parse_execution(opts.execution);
  config.weighting = parse_weighting(opts.weighting);

  const auto pair = load_pair(opts);
  config.strategy = bandlab::Strategy::BBPT;
  const auto bbpt = bandlab::run_strategy(pair.values, config);
  config.strategy = bandlab::Strategy::FFMDPT;
  const auto ffmdpt = bandlab::run_strategy(pair.values, config);

  auto out = open_out(opts.out_dir, "compare.csv");
  out << "entry_date,side,bbpt_exit_date,bbpt_return,ffmdpt_exit_date,ffmdpt_return,"
         "return_diff\n";
  std::size_t shared = 0;
  for (const auto& tb : bbpt.trades) {
    for (const auto& tf : ffmdpt.trades) {
      if (tf.entry_index != tb.entry_index || tf.side != tb.side) continue;
      ++shared;
      out << bandlab::format_date(pair.dates[static_cast<std::size_t>(tb.entry_index)]) << ','
          << to_string(tb.side) << ','
          << bandlab::format_date(pair.dates[static_cast<std::size_t>(tb.exit_index)]) << ','
          << bandlab::format_double(tb.log_return) << ','
          << bandlab::format_date(pair.dates[static_cast<std::size_t>(tf.exit_index)]) << ','
          << bandlab::format_double(tf.log_return) << ','
          << bandlab::format_double(tf.log_return - tb.log_return) << '\n';
      break;
    }
  }
  const double diff = ffmdpt.strategy_return.value - bbpt.strategy_return.value;
  auto summary = open_out(opts.out_dir, "compare.txt");
  auto emit = [&](std::ostream& os) {
    os << "BBPT return:     " << bandlab::format_double(bbpt.strategy_return.value) << " ("
       << bbpt.trades.size() << " trades)\n"
       << "FFMDPT return:   " << bandlab::format_double(ffmdpt.strategy_return.value) << " ("
       << ffmdpt.trades.size() << " trades)\n"
       << "FFMDPT - BBPT:   " << bandlab::format_double(diff) << " ("
       << bandlab::format_double(100.0 * diff) << "%)\n"
       << "shared entries:  " << shared << "\n";
  };
  emit(summary);
  emit(std::cout);
  return 0;
}

int cmd_optimize(const CommonOpts& opts, const std::string& plan_path) {
  const auto plan = bandlab::load_plan(plan_path);
  const auto pair = load_pair(opts);
  const auto rows = bandlab::walk_forward(pair, plan);
  const std::string table = bandlab::summarize_tables(rows, plan.k);

  auto text_out = open_out(opts.out_dir, "table.txt");
  text_out << table;
  auto csv_out = open_out(opts.out_dir, "table.csv");
  bandlab::write_comparison_csv(csv_out, rows);
  std::cout << table;
  return 0;
}

int cmd_verify(const std::string& mode, const std::string& execution, const std::string& out_dir,
               std::optional<std::uint64_t> seed, int paths, long length, long n, double k,
               int max_steps) {
  const bandlab::Execution exec = parse_execution(execution);
  bandlab::LawVerdict verdict;
  std::string header;
  if (mode == "exhaustive") {
    bandlab::SweepParams params;
    params.max_steps = max_steps;
    verdict = bandlab::exhaustive_law_sweep(params);
    header = "exhaustive sweep: alphabet {-1,0,1}, steps 1.." + std::to_string(max_steps) +
             ", n in {3,4,5}, k in {0.5,1,2}, idealized execution";
  } else if (mode == "montecarlo") {
    if (!seed) throw CLI::ValidationError("--seed", "montecarlo mode requires a seed");
    verdict = bandlab::montecarlo_law_sweep(*seed, paths, length, 1.0, n, k, exec);
    header = "monte-carlo sweep: " + std::to_string(paths) + " walks, length " +
             std::to_string(length) + ", n=" + std::to_string(n) +
             ", k=" + bandlab::format_double(k) + ", " + execution + " execution, seed " +
             std::to_string(*seed);
  } else {
    throw CLI::ValidationError("--mode", "must be exhaustive|montecarlo");
  }

  auto out = open_out(out_dir, "verdict.txt");
  auto emit = [&](std::ostream& os) {
    os << "return-duration law check\n" << header << "\n";
    if (mode == "montecarlo" && exec == bandlab::Execution::Lagged)
      os << "note: lagged execution is outside the law's assumptions (exit slippage); "
            "violations here measure the slippage effect\n";
    os << "trades checked:            " << verdict.trades_checked << "\n"
       << "gated (recent trade):      " << verdict.gated_precondition << "\n"
       << "gated (zero-return tie):   " << verdict.gated_zero_return << "\n"
       << "gated (entry on band tie): " << verdict.gated_entry_band_tie << "\n"
       << "skipped (end of data):     " << verdict.skipped_rule_not_fired << "\n"
       << "violations:                " << verdict.violation_count << "\n";
    for (std::size_t i = 0; i < verdict.violations.size(); ++i) {
      const auto& v = verdict.violations[i];
      os << "violation " << i << ": n=" << v.n << " k=" << bandlab::format_double(v.k)
         << " side=" << to_string(v.trade.side) << " entry=" << v.trade.entry_index
         << " exit=" << v.trade.exit_index
         << " return=" << bandlab::format_double(v.trade.log_return)
         << " duration=" << v.trade.duration << "\n  path:";
      for (double value : v.path) os << ' ' << bandlab::format_double(value);
      os << "\n";
    }
  };
  emit(out);
  emit(std::cout);
  return verdict.ok() ? 0 : 1;
}

int cmd_modelmap(const std::string& from, double value) {
  double theta = 0.0;
  std::optional<double> q_direct;
  if (from == "q") {
    if (!(value > 0.0)) throw CLI::ValidationError("--value", "q must be > 0");
    theta = bandlab::theta_from_q(value);
    q_direct = value;
  } else if (from == "theta") {
    if (!(value > -1.0 && value < 1.0))
      throw CLI::ValidationError("--value", "theta must lie in (-1, 1)");
    theta = value;
  } else if (from == "lambda") {
    if (!(value > 0.0 && value < 2.0))
      throw CLI::ValidationError("--value", "lambda must lie in (0, 2)");
    theta = bandlab::theta_from_lambda(value);
  } else if (from == "n") {
    if (!(value >= 1.0)) throw CLI::ValidationError("--value", "n must be >= 1");
    theta = 1.0 - 2.0 / (value + 1.0);
  } else {
    throw CLI::ValidationError("--from", "must be q|theta|lambda|n");
  }

  const auto q = q_direct ? q_direct : bandlab::q_from_theta(theta);
  const double lambda = 1.0 - theta;
  const double window = 2.0 / lambda - 1.0;
  std::cout << "q:      "
            << (q ? bandlab::format_double(*q) : std::string("out-of-range (theta not in (-1,0))"))
            << "\n"
            << "theta:  " << bandlab::format_double(theta) << "\n"
            << "lambda: " << bandlab::format_double(lambda) << "\n"
            << "n:      " << bandlab::format_double(window) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"band statistics, pair strategy backtests and model maps"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string strategy = "BBPT";
  std::string plan_path;
  std::string mode = "exhaustive";
  std::optional<std::uint64_t> seed;
  int mc_paths = 10000;
  long mc_length = 500;
  long mc_n = 20;
  double mc_k = 2.0;
  int max_steps = 14;
  std::string map_from;
  double map_value = 0.0;
  std::string verify_execution = "idealized";

  auto add_pair_opts = [&](CLI::App* cmd, bool with_band_params = true) {
    cmd->add_option("z", opts.z_path, "numerator asset CSV (date,price)")->required();
    cmd->add_option("x", opts.x_path, "denominator asset CSV (date,price)")->required();
    cmd->add_option("--out", opts.out_dir, "output directory")->required();
    if (with_band_params) {
      cmd->add_option("--n", opts.n, "rolling window size");
      cmd->add_option("--k", opts.k, "band width multiplier");
    }
  };

  auto* bands = app.add_subcommand("bands", "compute bands over the log price ratio");
  add_pair_opts(bands);

  auto* backtest = app.add_subcommand("backtest", "run one pair strategy");
  add_pair_opts(backtest);
  backtest->add_option("--strategy", strategy, "BBPT|FFMDPT");
  backtest->add_option("--execution", opts.execution, "lagged|idealized");
  backtest->add_option("--weighting", opts.weighting, "mean|sum");

  auto* compare = app.add_subcommand("compare", "run BBPT and FFMDPT side by side");
  add_pair_opts(compare);
  compare->add_option("--execution", opts.execution, "lagged|idealized");
  compare->add_option("--weighting", opts.weighting, "mean|sum");

  auto* optimize = app.add_subcommand("optimize", "walk-forward window optimization");
  add_pair_opts(optimize, /*with_band_params=*/false);
  optimize->add_option("--plan", plan_path, "plan file (key=value)")->required();

  auto* verify = app.add_subcommand("verify", "check the return-duration law of the "
                                              "band-reversion exit rule");
  verify->add_option("--mode", mode, "exhaustive|montecarlo");
  verify->add_option("--out", opts.out_dir, "output directory")->required();
  verify->add_option("--execution", verify_execution, "lagged|idealized (montecarlo only)");
  verify->add_option("--seed", seed, "RNG seed (required for montecarlo)");
  verify->add_option("--paths", mc_paths, "number of monte-carlo walks");
  verify->add_option("--length", mc_length, "walk length");
  verify->add_option("--n", mc_n, "rolling window size");
  verify->add_option("--k", mc_k, "band width multiplier");
  verify->add_option("--max-steps", max_steps, "exhaustive path length cap");

  auto* modelmap = app.add_subcommand("modelmap", "print the q/theta/lambda/n parameter chain");
  modelmap->add_option("--from", map_from, "q|theta|lambda|n")->required();
  modelmap->add_option("--value", map_value, "entry value")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bands->parsed()) return cmd_bands(opts);
    if (backtest->parsed()) return cmd_backtest(opts, strategy);
    if (compare->parsed()) return cmd_compare(opts);
    if (optimize->parsed()) return cmd_optimize(opts, plan_path);
    if (verify->parsed())
      return cmd_verify(mode, verify_execution, opts.out_dir, seed, mc_paths, mc_length, mc_n,
                        mc_k, max_steps);
    if (modelmap->parsed()) return cmd_modelmap(map_from, map_value);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
