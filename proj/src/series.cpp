#include "bandlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bandlab {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] void fail(const std::string& source, std::size_t line_no, const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

PriceSeries parse_price_csv(std::istream& in, const std::string& asset_id,
                            const std::string& source_name) {
  std::vector<std::pair<Date, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto comma = stripped.find(',');
    if (comma == std::string::npos) fail(source_name, line_no, "expected `date,price`");
    const std::string date_field = trim(std::string_view(stripped).substr(0, comma));
    const std::string price_field = trim(std::string_view(stripped).substr(comma + 1));
    const auto price = parse_double(price_field);
    if (first_content_line && !price) {
      // header row, detected by the non-numeric second field
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    const auto date = parse_date(date_field);
    if (!date) fail(source_name, line_no, "malformed date `" + date_field + "`");
    if (!price) fail(source_name, line_no, "malformed price `" + price_field + "`");
    if (!(*price > 0.0))
      fail(source_name, line_no, "non-positive price " + price_field + " on " + date_field);
    rows.emplace_back(*date, *price);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first)
      throw std::runtime_error(source_name + ": duplicate date " + format_date(rows[i].first));
  }

  PriceSeries series;
  series.asset_id = asset_id;
  series.dates.reserve(rows.size());
  series.prices.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    series.dates.push_back(rows[i].first);
    series.prices[static_cast<Eigen::Index>(i)] = rows[i].second;
  }
  return series;
}

PriceSeries load_price_csv(const std::string& path, const std::string& asset_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_price_csv(in, asset_id, path);
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
  out << "date,price\n";
  for (Eigen::Index i = 0; i < series.size(); ++i)
    out << format_date(series.dates[static_cast<std::size_t>(i)]) << ','
        << format_double(series.prices[i]) << '\n';
}

LogRatioSeries align_pair(const PriceSeries& numerator, const PriceSeries& denominator) {
  if (numerator.size() == 0 || denominator.size() == 0)
    throw std::invalid_argument("align_pair: empty input series");

  LogRatioSeries out;
  out.numerator_id = numerator.asset_id;
  out.denominator_id = denominator.asset_id;

  std::vector<double> values;
  std::size_t i = 0, j = 0;
  while (i < numerator.dates.size() && j < denominator.dates.size()) {
    if (numerator.dates[i] < denominator.dates[j]) {
      ++i;
    } else if (denominator.dates[j] < numerator.dates[i]) {
      ++j;
    } else {
      out.dates.push_back(numerator.dates[i]);
      values.push_back(std::log(numerator.prices[static_cast<Eigen::Index>(i)]) -
                       std::log(denominator.prices[static_cast<Eigen::Index>(j)]));
      ++i;
      ++j;
    }
  }
  if (values.empty())
    throw std::runtime_error("align_pair: no common dates between " + numerator.asset_id +
                             " and " + denominator.asset_id);
  out.values = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                static_cast<Eigen::Index>(values.size()));
  return out;
}

} // namespace bandlab
