#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace bandlab {

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date, YYYY-MM-DD. Rejects impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

// Shortest round-trip decimal form (to_chars); parse is full-field strict.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

} // namespace bandlab
