#pragma once

#include <Eigen/Core>
#include <optional>

namespace bandlab {

// Simple exponential smoothing state. lambda must lie in (0, 2); the usual
// practical range is (0, 1). The first observation initializes the forecast.
struct SesState {
  double lambda = 0.5;
  double forecast = 0.0;
  bool initialized = false;
};

SesState make_ses(double lambda);

// Forecast update: lambda*y + (1-lambda)*forecast, in exactly that order.
SesState ses_forecast_step(SesState state, double y_new);

// Weight on the observation aged j is lambda*(1-lambda)^j, j = 0..horizon-1.
Eigen::ArrayXd ses_weights(double lambda, Eigen::Index horizon);

// (1-lambda)/lambda, the mean age of the exponentially decaying weights.
double ses_weighted_age(double lambda);

// (n-1)/2, the mean age of the n equal moving-average weights.
double mave_weighted_age(Eigen::Index n);

// Matching the weighted ages gives lambda = 2/(n+1); inverse n = 2/lambda - 1.
double lambda_for_window(Eigen::Index n);
double window_for_lambda(double lambda);

// First-difference MA model y_t = y_{t-1} + theta*eps_{t-1} + eps_t,
// invertible for theta in (-1, 1). Its one-step forecast equals SES with
// lambda = 1 - theta.
struct Arima011Params {
  double theta = 0.0;

  void validate() const;
};

double lambda_from_theta(double theta);
double theta_from_lambda(double lambda);

// Same arithmetic order as ses_forecast_step so the equivalence is exact.
double arima011_forecast_step(const Arima011Params& params, double y_new, double prev_forecast);

// Local level observed with noise: y_t = level_{t-1} + eps_t,
// level_t = level_{t-1} + eta_t. q = var_eps/var_eta.
struct RwpnParams {
  double var_eps = 1.0;
  double var_eta = 1.0;

  void validate() const;
  double q() const { return var_eps / var_eta; }
};

// Lag-1 autocorrelation of the differenced observation series,
// -var_eps/(var_eta + 2*var_eps); always in (-0.5, 0).
double rwpn_gamma1(const RwpnParams& params);

// MA coefficient whose lag-1 autocorrelation matches the differenced local
// level model: theta/(1+theta^2) = -q/(1+2q), theta in (-1, 0). Evaluated in
// the cancellation-free form theta = -2q/(1 + 2q + sqrt(1+4q)).
double theta_from_q(double q);

// Inverse of theta_from_q; empty unless theta lies in (-1, 0).
std::optional<double> q_from_theta(double theta);

// Composite map q -> theta -> lambda -> n = 2/lambda - 1. Real-valued; the
// chain is an approximation and callers round when they need a usable window.
double window_for_q(double q);

// out[0] = init, out[i] = lambda*y[i-1] + (1-lambda)*out[i-1]: the running
// one-step forecast of SES along the series.
Eigen::ArrayXd ewma_series(const Eigen::Ref<const Eigen::ArrayXd>& y, double lambda, double init);

} // namespace bandlab
