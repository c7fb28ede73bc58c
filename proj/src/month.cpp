#include "cyclecast/month.hpp"

#include <charconv>
#include <cstdio>

#include "cyclecast/error.hpp"

namespace cyclecast {

int month_index(Month m) {
  return static_cast<int>(m.year()) * 12 + static_cast<int>(static_cast<unsigned>(m.month())) - 1;
}

Month month_from_index(int index) {
  int year = index >= 0 ? index / 12 : (index - 11) / 12;
  int month = index - year * 12 + 1;
  return make_month(year, static_cast<unsigned>(month));
}

int months_between(Month from, Month to) { return month_index(to) - month_index(from); }

Month add_months(Month m, int n) { return month_from_index(month_index(m) + n); }

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

bool try_parse_month(std::string_view text, Month& out) {
  if (text.size() != 7 && text.size() != 10) return false;
  if (text[4] != '-') return false;
  int year = 0, month = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month)) return false;
  if (month < 1 || month > 12) return false;
  if (text.size() == 10) {
    if (text[7] != '-' || text.substr(8, 2) != "01") return false;
  }
  out = make_month(year, static_cast<unsigned>(month));
  return true;
}

Month parse_month(std::string_view text) {
  Month m;
  if (!try_parse_month(text, m)) fail(ErrorKind::MalformedRow, "bad month '" + std::string(text) + "'");
  return m;
}

std::string format_month(Month m) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(m.year()), static_cast<unsigned>(m.month()));
  return buf;
}

std::string format_fred_date(Month m) { return format_month(m) + "-01"; }

}  // namespace cyclecast
