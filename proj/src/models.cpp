#include "bandlab/models.hpp"

#include <cmath>
#include <stdexcept>

namespace bandlab {
namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 2.0))
    throw std::invalid_argument("smoothing weight lambda must lie in (0, 2)");
}

} // namespace

SesState make_ses(double lambda) {
  require_lambda(lambda);
  return SesState{lambda, 0.0, false};
}

SesState ses_forecast_step(SesState state, double y_new) {
  require_lambda(state.lambda);
  if (!state.initialized) {
    state.forecast = y_new;  // first observation seeds the forecast
    state.initialized = true;
    return state;
  }
  state.forecast = state.lambda * y_new + (1.0 - state.lambda) * state.forecast;
  return state;
}

Eigen::ArrayXd ses_weights(double lambda, Eigen::Index horizon) {
  require_lambda(lambda);
  if (horizon < 1) throw std::invalid_argument("ses_weights: horizon must be >= 1");
  Eigen::ArrayXd w(horizon);
  double geometric = lambda;
  for (Eigen::Index j = 0; j < horizon; ++j) {
    w[j] = geometric;
    geometric *= (1.0 - lambda);
  }
  return w;
}

double ses_weighted_age(double lambda) {
  // (0, 1]: lambda = 1 puts all weight on the newest observation, age 0
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("ses_weighted_age: lambda must lie in (0, 1]");
  return (1.0 - lambda) / lambda;
}

double mave_weighted_age(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("mave_weighted_age: n must be >= 1");
  return static_cast<double>(n - 1) / 2.0;
}

double lambda_for_window(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("lambda_for_window: n must be >= 1");
  return 2.0 / static_cast<double>(n + 1);
}

double window_for_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("window_for_lambda: lambda must lie in (0, 1]");
  return 2.0 / lambda - 1.0;
}

void Arima011Params::validate() const {
  if (!(theta > -1.0 && theta < 1.0))
    throw std::invalid_argument("MA coefficient theta must lie in (-1, 1)");
}

double lambda_from_theta(double theta) {
  if (!(theta > -1.0 && theta < 1.0))
    throw std::invalid_argument("lambda_from_theta: theta must lie in (-1, 1)");
  return 1.0 - theta;
}

double theta_from_lambda(double lambda) {
  require_lambda(lambda);
  return 1.0 - lambda;
}

double arima011_forecast_step(const Arima011Params& params, double y_new, double prev_forecast) {
  params.validate();
  // Same arithmetic order as ses_forecast_step with lambda = 1 - theta, so
  // equal inputs give bitwise-equal forecasts.
  const double lambda = 1.0 - params.theta;
  return lambda * y_new + (1.0 - lambda) * prev_forecast;
}

void RwpnParams::validate() const {
  if (!(var_eps > 0.0) || !(var_eta > 0.0))
    throw std::invalid_argument("noise variances must be strictly positive");
}

double rwpn_gamma1(const RwpnParams& params) {
  params.validate();
  return -params.var_eps / (params.var_eta + 2.0 * params.var_eps);
}

double theta_from_q(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("theta_from_q: q must be > 0");
  return -2.0 * q / (1.0 + 2.0 * q + std::sqrt(1.0 + 4.0 * q));
}

std::optional<double> q_from_theta(double theta) {
  if (!(theta > -1.0 && theta < 0.0)) return std::nullopt;
  const double r = -theta / (1.0 + theta * theta);  // = q/(1+2q), in (0, 1/2)
  return r / (1.0 - 2.0 * r);
}

double window_for_q(double q) {
  return 2.0 / lambda_from_theta(theta_from_q(q)) - 1.0;
}

Eigen::ArrayXd ewma_series(const Eigen::Ref<const Eigen::ArrayXd>& y, double lambda, double init) {
  require_lambda(lambda);
  Eigen::ArrayXd out(y.size());
  if (y.size() == 0) return out;
  SesState state{lambda, init, true};
  out[0] = state.forecast;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    state = ses_forecast_step(state, y[i - 1]);
    out[i] = state.forecast;
  }
  return out;
}

} // namespace bandlab
