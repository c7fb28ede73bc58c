#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cyclecast {

using Month = std::chrono::year_month;

inline constexpr Month make_month(int year, unsigned month) {
  return Month{std::chrono::year{year}, std::chrono::month{month}};
}

/// Months since 0000-01; used for indexing and distance computations.
int month_index(Month m);
Month month_from_index(int index);
int months_between(Month from, Month to);  // to - from
Month add_months(Month m, int n);

/// Accepts `YYYY-MM` or `YYYY-MM-DD` (day must be 01). Returns false on any
/// other shape.
bool try_parse_month(std::string_view text, Month& out);
Month parse_month(std::string_view text);  // throws Error{MalformedRow}

std::string format_month(Month m);      // YYYY-MM
std::string format_fred_date(Month m);  // YYYY-MM-01

}  // namespace cyclecast
