#include "bandlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bandlab/rolling.hpp"

namespace bandlab {

std::uint64_t path_count(const PathSpec& spec) {
  if (spec.alphabet.empty()) throw std::invalid_argument("path alphabet must be non-empty");
  if (spec.steps < 0) throw std::invalid_argument("path steps must be >= 0");
  const auto base = static_cast<std::uint64_t>(spec.alphabet.size());
  std::uint64_t count = 1;
  for (int i = 0; i < spec.steps; ++i) {
    if (count > kMaxEnumeratedPaths / base)
      throw std::invalid_argument("path enumeration guard exceeded (limit " +
                                  std::to_string(kMaxEnumeratedPaths) + ")");
    count *= base;
  }
  if (count > kMaxEnumeratedPaths)
    throw std::invalid_argument("path enumeration guard exceeded (limit " +
                                std::to_string(kMaxEnumeratedPaths) + ")");
  return count;
}

void enumerate_paths(const PathSpec& spec,
                     const std::function<void(std::span<const double>)>& visit) {
  path_count(spec);
  const auto& a = spec.alphabet;
  const int base = static_cast<int>(a.size());
  const int steps = spec.steps;
  std::vector<int> digits(static_cast<std::size_t>(steps), 0);
  std::vector<double> values(static_cast<std::size_t>(steps) + 1);
  values[0] = spec.start_value;
  for (int i = 0; i < steps; ++i) values[static_cast<std::size_t>(i) + 1] = values[i] + a[0];
  for (;;) {
    visit(std::span<const double>(values.data(), values.size()));
    int pos = steps - 1;
    while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == base - 1)
      digits[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++digits[static_cast<std::size_t>(pos)];
    for (int i = pos; i < steps; ++i)
      values[static_cast<std::size_t>(i) + 1] = values[i] + a[digits[static_cast<std::size_t>(i)]];
  }
}

Eigen::ArrayXd gen_random_walk(std::uint64_t seed, Eigen::Index length, double step_sd) {
  if (length < 1) throw std::invalid_argument("gen_random_walk: length must be >= 1");
  Eigen::ArrayXd out(length);
  if (step_sd == 0.0) {
    out.setZero();
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, step_sd);
  double level = 0.0;
  for (Eigen::Index i = 0; i < length; ++i) {
    level += step(rng);
    out[i] = level;
  }
  return out;
}

void LawVerdict::absorb(const LawVerdict& other) {
  trades_checked += other.trades_checked;
  gated_precondition += other.gated_precondition;
  gated_zero_return += other.gated_zero_return;
  gated_entry_band_tie += other.gated_entry_band_tie;
  skipped_rule_not_fired += other.skipped_rule_not_fired;
  violation_count += other.violation_count;
  for (const auto& viol : other.violations) {
    if (violations.size() >= kMaxStoredViolations) break;
    violations.push_back(viol);
  }
}

namespace {

void classify_trade(const Trade& t, Eigen::Index n, double k, std::span<const double> y,
                    std::span<const double> center, std::span<const double> sigma,
                    LawVerdict& verdict, bool keep_record) {
  TradeRecord record;
  record.duration = t.duration;
  record.log_return = t.log_return;
  record.precondition_held = t.clean_lookback;
  record.zero_return = t.log_return == 0.0;
  record.rule_fired = t.exit_reason == ExitReason::CenterCross;
  if (keep_record) verdict.records.push_back(record);

  if (!record.rule_fired) {
    ++verdict.skipped_rule_not_fired;
    return;
  }
  const auto e = static_cast<std::size_t>(t.entry_index);
  const double upper = center[e] + k * sigma[e];
  const double lower = center[e] - k * sigma[e];
  if (y[e] == upper || y[e] == lower) {
    ++verdict.gated_entry_band_tie;
    return;
  }
  if (!t.clean_lookback) {
    ++verdict.gated_precondition;
    return;
  }
  if (record.zero_return) {
    ++verdict.gated_zero_return;
    return;
  }
  ++verdict.trades_checked;
  const bool non_negative = t.log_return >= 0.0;
  const bool within_window = t.duration <= n;
  if (non_negative != within_window) {
    ++verdict.violation_count;
    if (verdict.violations.size() < LawVerdict::kMaxStoredViolations) {
      LawViolation viol;
      viol.n = n;
      viol.k = k;
      viol.trade = t;
      viol.path.assign(y.begin(), y.end());
      verdict.violations.push_back(std::move(viol));
    }
  }
}

// Two-pass window stats into caller buffers; only indices >= n-1 are written.
void window_stats(const double* y, Eigen::Index len, Eigen::Index n, double* center,
                  double* sigma) {
  for (Eigen::Index i = n - 1; i < len; ++i) {
    const double* w = y + (i - n + 1);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += w[j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = w[j] - mean;
      ss += d * d;
    }
    center[i] = mean;
    sigma[i] = std::sqrt(ss / static_cast<double>(n - 1));
  }
}

} // namespace

LawVerdict verify_return_duration(std::span<const double> y, Eigen::Index n, double k,
                                  Execution execution) {
  const auto len = static_cast<Eigen::Index>(y.size());
  if (len < n) throw std::invalid_argument("verify_return_duration: series shorter than window");
  std::vector<double> center(y.size()), sigma(y.size());
  window_stats(y.data(), len, n, center.data(), sigma.data());

  EngineConfig config;
  config.params = BandParams{n, k};
  config.execution = execution;
  config.strategy = Strategy::BBPT;

  std::vector<Trade> trades;
  run_pair_rules(y, center, sigma, config, trades);

  LawVerdict verdict;
  for (const Trade& t : trades)
    classify_trade(t, n, k, y, center, sigma, verdict, /*keep_record=*/true);
  return verdict;
}

LawVerdict exhaustive_law_sweep(const SweepParams& params) {
  if (params.alphabet.empty()) throw std::invalid_argument("sweep alphabet must be non-empty");
  if (params.max_steps < 1) throw std::invalid_argument("sweep needs max_steps >= 1");

  LawVerdict verdict;
  const int base = static_cast<int>(params.alphabet.size());
  const auto& a = params.alphabet;
  const int max_len = params.max_steps + 1;

  std::vector<double> values(static_cast<std::size_t>(max_len));
  std::vector<double> center(static_cast<std::size_t>(max_len));
  std::vector<double> sigma(static_cast<std::size_t>(max_len));
  std::vector<int> digits(static_cast<std::size_t>(params.max_steps));
  std::vector<Trade> trades;
  trades.reserve(16);

  for (int steps = 1; steps <= params.max_steps; ++steps) {
    path_count(PathSpec{steps, params.alphabet, 0.0, 0.0});
    const auto len = static_cast<Eigen::Index>(steps) + 1;
    std::fill(digits.begin(), digits.begin() + steps, 0);
    values[0] = 0.0;
    for (int i = 0; i < steps; ++i) values[static_cast<std::size_t>(i) + 1] = values[i] + a[0];

    for (;;) {
      const std::span<const double> y(values.data(), static_cast<std::size_t>(len));
      for (const Eigen::Index n : params.windows) {
        if (len < n) continue;
        window_stats(values.data(), len, n, center.data(), sigma.data());
        const std::span<const double> c(center.data(), static_cast<std::size_t>(len));
        const std::span<const double> s(sigma.data(), static_cast<std::size_t>(len));
        for (const double k : params.widths) {
          EngineConfig config;
          config.params = BandParams{n, k};
          config.execution = Execution::Idealized;
          config.strategy = Strategy::BBPT;
          trades.clear();
          run_pair_rules(y, c, s, config, trades);
          for (const Trade& t : trades)
            classify_trade(t, n, k, y, c, s, verdict, /*keep_record=*/false);
        }
      }
      int pos = steps - 1;
      while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == base - 1)
        digits[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
      ++digits[static_cast<std::size_t>(pos)];
      for (int i = pos; i < steps; ++i)
        values[static_cast<std::size_t>(i) + 1] =
            values[i] + a[digits[static_cast<std::size_t>(i)]];
    }
  }
  return verdict;
}

LawVerdict montecarlo_law_sweep(std::uint64_t seed, int n_paths, Eigen::Index length,
                                double step_sd, Eigen::Index n, double k, Execution execution) {
  LawVerdict verdict;
  for (int i = 0; i < n_paths; ++i) {
    const Eigen::ArrayXd walk = gen_random_walk(seed + static_cast<std::uint64_t>(i), length,
                                                step_sd);
    const LawVerdict one = verify_return_duration(
        {walk.data(), static_cast<std::size_t>(walk.size())}, n, k, execution);
    verdict.absorb(one);
  }
  return verdict;
}

bool check_telescoping(std::span<const double> y, Eigen::Index t_entry, Eigen::Index t_exit,
                       double tol) {
  const auto len = static_cast<Eigen::Index>(y.size());
  if (t_entry < 0 || t_exit < t_entry || t_exit >= len)
    throw std::invalid_argument("check_telescoping: invalid indices");
  double sum = 0.0;
  for (Eigen::Index t = t_entry; t < t_exit; ++t)
    sum += y[static_cast<std::size_t>(t) + 1] - y[static_cast<std::size_t>(t)];
  return std::abs(y[static_cast<std::size_t>(t_exit)] -
                  (y[static_cast<std::size_t>(t_entry)] + sum)) <= tol;
}

namespace {

// Band-cross prefix: n-1 high bars, then a signal bar just above the entry
// level. k = 0.5 keeps the lower arm above the signal value for every n >= 2.
std::vector<double> entry_prefix(Eigen::Index n, double signal_value) {
  std::vector<double> y(static_cast<std::size_t>(n) - 1, 1.0);
  y.push_back(signal_value);
  return y;
}

constexpr double kScenarioWidth = 0.5;

} // namespace

bool check_constant_path_exit(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("check_constant_path_exit: n must be >= 2");
  std::vector<double> y = entry_prefix(n, 1e-6);
  y.insert(y.end(), static_cast<std::size_t>(n), 0.0);  // constant from entry on

  Eigen::Map<const Eigen::ArrayXd> map(y.data(), static_cast<Eigen::Index>(y.size()));
  EngineConfig config;
  config.params = BandParams{n, kScenarioWidth};
  config.execution = Execution::Idealized;
  const BacktestReport report = run_bbpt(map, config);

  if (report.trades.size() != 1) return false;
  const Trade& t = report.trades.front();
  return t.side == Side::Long && t.entry_index == n && t.duration == n &&
         t.exit_reason == ExitReason::CenterCross && t.log_return == 0.0;
}

BoundStatus check_window_mean_bounds(std::span<const double> y, Eigen::Index t_entry,
                                     Eigen::Index n, int sign) {
  const auto len = static_cast<Eigen::Index>(y.size());
  if (n < 2 || t_entry < 0 || t_entry + n > len || sign == 0)
    return BoundStatus::NotApplicable;
  const double y_star = y[static_cast<std::size_t>(t_entry)];
  const double y_end = y[static_cast<std::size_t>(t_entry + n - 1)];
  double sum = 0.0;
  for (Eigen::Index t = t_entry; t < t_entry + n; ++t) sum += y[static_cast<std::size_t>(t)];
  const double mean = sum / static_cast<double>(n);
  if (sign < 0) {
    const double eps = y_star - y_end;
    if (!(eps > 0.0)) return BoundStatus::NotApplicable;
    return (y_star - eps < mean && mean < y_star) ? BoundStatus::Holds : BoundStatus::Violated;
  }
  const double eps = y_end - y_star;
  if (!(eps > 0.0)) return BoundStatus::NotApplicable;
  return (y_star < mean && mean < y_star + eps) ? BoundStatus::Holds : BoundStatus::Violated;
}

BoundStatus check_partial_window_mean_bounds(std::span<const double> y, Eigen::Index t_entry,
                                             Eigen::Index t_prime, Eigen::Index n, int sign) {
  const auto len = static_cast<Eigen::Index>(y.size());
  if (n < 2 || t_entry <= 0 || t_prime <= t_entry || t_prime > t_entry + n - 1 ||
      t_prime >= len || t_prime - n + 1 < 0 || sign == 0)
    return BoundStatus::NotApplicable;

  const double y_star = y[static_cast<std::size_t>(t_entry)];
  const double y_prime = y[static_cast<std::size_t>(t_prime)];
  const Eigen::Index w_begin = t_prime - n + 1;

  double sum = 0.0;
  for (Eigen::Index t = w_begin; t <= t_prime; ++t) sum += y[static_cast<std::size_t>(t)];
  const double mean = sum / static_cast<double>(n);

  if (sign < 0) {
    const double eps = y_star - y_prime;
    if (!(eps > 0.0)) return BoundStatus::NotApplicable;
    for (Eigen::Index t = w_begin; t < t_entry; ++t)
      if (!(y[static_cast<std::size_t>(t)] > y_star - eps)) return BoundStatus::NotApplicable;
    return mean > y_star - eps ? BoundStatus::Holds : BoundStatus::Violated;
  }

  const double eps = y_prime - y_star;
  if (!(eps > 0.0)) return BoundStatus::NotApplicable;
  if (t_entry - n + 1 < 0) return BoundStatus::NotApplicable;
  double entry_sum = 0.0;
  for (Eigen::Index t = t_entry - n + 1; t <= t_entry; ++t)
    entry_sum += y[static_cast<std::size_t>(t)];
  const double center_at_entry = entry_sum / static_cast<double>(n);
  if (!(eps >= center_at_entry - y_star)) return BoundStatus::NotApplicable;
  for (Eigen::Index t = w_begin; t < t_entry; ++t)
    if (!(y[static_cast<std::size_t>(t)] < center_at_entry)) return BoundStatus::NotApplicable;
  return mean < y_star + eps ? BoundStatus::Holds : BoundStatus::Violated;
}

BoundStatus check_max_return_bound(const Trade& trade, double center_at_entry) {
  if (trade.exit_reason != ExitReason::CenterCross || !trade.clean_lookback)
    return BoundStatus::NotApplicable;
  const double gap = trade.side == Side::Long ? center_at_entry - trade.entry_y
                                              : trade.entry_y - center_at_entry;
  if (!(gap > 0.0)) return BoundStatus::NotApplicable;
  return trade.log_return < gap ? BoundStatus::Holds : BoundStatus::Violated;
}

bool check_boundary_exit_rule(Eigen::Index n, double eps) {
  if (n < 2 || !(eps > 0.0))
    throw std::invalid_argument("check_boundary_exit_rule: need n >= 2 and eps > 0");

  auto run = [&](double final_step) {
    std::vector<double> y = entry_prefix(n, 1e-9 * eps);
    y.insert(y.end(), static_cast<std::size_t>(n) - 1, 0.0);
    y.push_back(final_step);  // the duration-n bar
    Eigen::Map<const Eigen::ArrayXd> map(y.data(), static_cast<Eigen::Index>(y.size()));
    EngineConfig config;
    config.params = BandParams{n, kScenarioWidth};
    config.execution = Execution::Idealized;
    return run_bbpt(map, config);
  };

  const BacktestReport up = run(+eps);
  if (up.trades.size() != 1) return false;
  const Trade& t_up = up.trades.front();
  const bool exits_at_window = t_up.exit_reason == ExitReason::CenterCross &&
                               t_up.duration == n && t_up.log_return == eps;

  const BacktestReport down = run(-eps);
  if (down.trades.size() != 1) return false;
  // With the final bar a hair below entry, the rule must not fire by the
  // duration-n bar; the position is still open when the data ends.
  const bool stays_in = down.trades.front().exit_reason == ExitReason::EndOfData;

  return exits_at_window && stays_in;
}

} // namespace bandlab
