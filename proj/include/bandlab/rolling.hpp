#pragma once

#include <Eigen/Core>
#include <iosfwd>

#include "bandlab/series.hpp"

namespace bandlab {

struct BandParams {
  Eigen::Index n = 20;  // window size, >= 2
  double k = 2.0;       // width multiplier, > 0

  void validate() const;
};

// Center line, rolling sd and the two arms for one (n, k). Entries before
// valid_from (= n-1, 0-based) are NaN, never zero.
struct BandSet {
  BandParams params;
  Eigen::ArrayXd center;
  Eigen::ArrayXd sigma;
  Eigen::ArrayXd upper;
  Eigen::ArrayXd lower;
  Eigen::Index valid_from = 0;

  bool defined(Eigen::Index i) const { return i >= valid_from; }
};

// Windowed OLS estimates of the intercept-only model, solved through the
// normal equations on a ones regressor. Exists to cross-check the moving
// average / residual-sd route; do not alias it to rolling_mean.
struct RollingFit {
  Eigen::ArrayXd beta_hat;
  Eigen::ArrayXd sigma_hat;
  Eigen::Index valid_from = 0;
};

// Mean of y[i-n+1..i] at each i >= n-1; NaN before. Throws if len < n.
Eigen::ArrayXd rolling_mean(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n);

// Unbiased rolling sd, denominator n-1, two-pass per window. Requires n >= 2.
Eigen::ArrayXd rolling_std(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n);

BandSet bollinger_bands(const Eigen::Ref<const Eigen::ArrayXd>& y, const BandParams& params);

RollingFit rolling_intercept_fit(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n);

struct PredictionInterval {
  double lower = 0;
  double upper = 0;
};

// exact: beta +- m*sigma*sqrt(1 + 1/n). approximate: beta +- m*sigma, which
// coincides with the band arms when m = k. The t-quantile is the caller's
// multiplier; no table lookup here.
PredictionInterval prediction_interval(double beta_hat, double sigma_hat, Eigen::Index n,
                                       double multiplier, bool exact);

// `date,y,center,sigma,upper,lower`; empty fields in the undefined region.
void write_band_csv(std::ostream& out, const LogRatioSeries& series, const BandSet& bands);

} // namespace bandlab
