#include "bandlab/rolling.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bandlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_window(Eigen::Index len, Eigen::Index n, Eigen::Index min_n) {
  if (n < min_n)
    throw std::invalid_argument("window size must be >= " + std::to_string(min_n) + ", got " +
                                std::to_string(n));
  if (len < n)
    throw std::invalid_argument("series length " + std::to_string(len) +
                                " shorter than window " + std::to_string(n));
}

} // namespace

void BandParams::validate() const {
  if (n < 2) throw std::invalid_argument("band window n must be >= 2");
  if (!(k > 0.0)) throw std::invalid_argument("width multiplier k must be > 0");
}

Eigen::ArrayXd rolling_mean(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n) {
  require_window(y.size(), n, 1);
  Eigen::ArrayXd out = Eigen::ArrayXd::Constant(y.size(), kNaN);
  for (Eigen::Index i = n - 1; i < y.size(); ++i) out[i] = y.segment(i - n + 1, n).mean();
  return out;
}

Eigen::ArrayXd rolling_std(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n) {
  require_window(y.size(), n, 2);
  Eigen::ArrayXd out = Eigen::ArrayXd::Constant(y.size(), kNaN);
  for (Eigen::Index i = n - 1; i < y.size(); ++i) {
    const auto window = y.segment(i - n + 1, n);
    const double m = window.mean();
    out[i] = std::sqrt((window - m).square().sum() / static_cast<double>(n - 1));
  }
  return out;
}

BandSet bollinger_bands(const Eigen::Ref<const Eigen::ArrayXd>& y, const BandParams& params) {
  params.validate();
  require_window(y.size(), params.n, 2);
  BandSet bands;
  bands.params = params;
  bands.center = rolling_mean(y, params.n);
  bands.sigma = rolling_std(y, params.n);
  bands.upper = bands.center + params.k * bands.sigma;
  bands.lower = bands.center - params.k * bands.sigma;
  bands.valid_from = params.n - 1;
  return bands;
}

RollingFit rolling_intercept_fit(const Eigen::Ref<const Eigen::ArrayXd>& y, Eigen::Index n) {
  require_window(y.size(), n, 2);
  RollingFit fit;
  fit.beta_hat = Eigen::ArrayXd::Constant(y.size(), kNaN);
  fit.sigma_hat = Eigen::ArrayXd::Constant(y.size(), kNaN);
  fit.valid_from = n - 1;

  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const auto solver = XtX.ldlt();
  Eigen::VectorXd window(n);
  for (Eigen::Index i = n - 1; i < y.size(); ++i) {
    window = y.matrix().segment(i - n + 1, n);
    const Eigen::VectorXd beta = solver.solve(X.transpose() * window);
    const Eigen::VectorXd resid = window - X * beta;
    fit.beta_hat[i] = beta[0];
    fit.sigma_hat[i] = std::sqrt(resid.squaredNorm() / static_cast<double>(n - 1));
  }
  return fit;
}

PredictionInterval prediction_interval(double beta_hat, double sigma_hat, Eigen::Index n,
                                       double multiplier, bool exact) {
  if (n < 2) throw std::invalid_argument("prediction_interval: n must be >= 2");
  if (sigma_hat < 0.0) throw std::invalid_argument("prediction_interval: sigma_hat must be >= 0");
  const double inflation = exact ? std::sqrt(1.0 + 1.0 / static_cast<double>(n)) : 1.0;
  const double half_width = multiplier * sigma_hat * inflation;
  return {beta_hat - half_width, beta_hat + half_width};
}

void write_band_csv(std::ostream& out, const LogRatioSeries& series, const BandSet& bands) {
  if (series.size() != bands.center.size())
    throw std::invalid_argument("write_band_csv: series/band length mismatch");
  out << "date,y,center,sigma,upper,lower\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out << format_date(series.dates[static_cast<std::size_t>(i)]) << ','
        << format_double(series.values[i]) << ',';
    if (bands.defined(i)) {
      out << format_double(bands.center[i]) << ',' << format_double(bands.sigma[i]) << ','
          << format_double(bands.upper[i]) << ',' << format_double(bands.lower[i]);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

} // namespace bandlab
