#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "bandlab/textio.hpp"

namespace bandlab {

// Dated univariate price observations. Dates strictly increasing, prices > 0.
struct PriceSeries {
  std::string asset_id;
  std::vector<Date> dates;
  Eigen::ArrayXd prices;

  Eigen::Index size() const { return prices.size(); }
};

// y_t = ln(P_num) - ln(P_den) over the date intersection of two price series.
struct LogRatioSeries {
  std::string numerator_id;
  std::string denominator_id;
  std::vector<Date> dates;
  Eigen::ArrayXd values;

  Eigen::Index size() const { return values.size(); }
};

// CSV rows are `date,price`, ISO dates, '.' decimal separator. A single
// header row is auto-detected by a non-numeric second field. Unsorted rows
// are sorted by date; duplicate dates and non-positive prices are errors.
PriceSeries parse_price_csv(std::istream& in, const std::string& asset_id,
                            const std::string& source_name = "<stream>");
PriceSeries load_price_csv(const std::string& path, const std::string& asset_id);
void write_price_csv(std::ostream& out, const PriceSeries& series);

// Strict date intersection; value = ln(numerator price) - ln(denominator price).
LogRatioSeries align_pair(const PriceSeries& numerator, const PriceSeries& denominator);

} // namespace bandlab
