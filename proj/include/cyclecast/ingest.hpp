#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyclecast/month.hpp"

namespace cyclecast {

struct Observation {
  Month month;
  double value;
};

/// One named monthly index. Months are consecutive with no gaps and every
/// value is finite; the loaders enforce both.
struct MonthlySeries {
  std::string name;
  std::string unit;
  std::vector<Observation> observations;

  bool empty() const { return observations.empty(); }
  std::size_t size() const { return observations.size(); }
  Month first() const { return observations.front().month; }
  Month last() const { return observations.back().month; }
  std::vector<double> values() const;
};

struct SeriesInfo {
  std::string_view name;
  std::string_view unit;
  std::string_view description;
};

/// The 14 indexes in their fixed column order.
inline constexpr std::array<SeriesInfo, 14> kCanonicalSeries{{
    {"BAA", "Percent", "Moody's Seasoned Baa Corporate Bond Yield"},
    {"CUMFNS", "Percent of Capacity", "Capacity Utilization: Manufacturing"},
    {"INDPRO", "Index 2012=100", "Industrial Production Index"},
    {"IPMAT", "Index 2012=100", "Industrial Production: Materials"},
    {"MANEMP", "Thousands of Persons", "All Employees, Manufacturing"},
    {"USGOOD", "Thousands of Persons", "All Employees, Goods-Producing"},
    {"UNRATE", "Percent", "Unemployment Rate"},
    {"TB3MS", "Percent", "3-Month Treasury Bill Secondary Market Rate"},
    {"GS10", "Percent", "10-Year Treasury Constant Maturity Rate"},
    {"T10Y3M", "Percent", "10-Year Treasury Constant Maturity Minus 3-Month Treasury Bill"},
    {"WTISPLC", "Dollars per Barrel", "Spot Crude Oil Price: West Texas Intermediate"},
    {"PPIACO", "Index 1982=100", "Producer Price Index for All Commodities"},
    {"CPIAUCSL", "Index 1982-1984=100", "Consumer Price Index for All Urban Consumers"},
    {"ISM", "Index", "ISM Manufacturing Composite Index"},
}};

inline constexpr std::size_t kSeriesCount = kCanonicalSeries.size();

/// Position of `name` in the canonical order, or -1.
int canonical_series_index(std::string_view name);

inline constexpr Month kCanonicalStart = make_month(1959, 1);
inline constexpr Month kCanonicalEnd = make_month(2020, 6);

/// Half-open recession span [start, end).
struct RecessionSpan {
  Month start;
  Month end;
};

class RecessionCalendar {
 public:
  RecessionCalendar() = default;
  explicit RecessionCalendar(std::vector<RecessionSpan> spans);  // validates

  /// NBER recessions between 1959-01 and 2020-06, end-exclusive.
  static RecessionCalendar canonical();

  bool in_recession(Month m) const;
  const std::vector<RecessionSpan>& spans() const { return spans_; }

 private:
  std::vector<RecessionSpan> spans_;
};

/// Aligned 14-column monthly panel. labels[i] == 1 marks a recession month.
struct MonthlyPanel {
  std::vector<Month> months;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<int> labels;

  std::size_t size() const { return months.size(); }
  int column_index(std::string_view name) const;  // -1 when absent
  const std::vector<double>& column(std::string_view name) const;
};

MonthlySeries parse_series_csv(std::string_view text, std::string name);
MonthlySeries load_series_csv(const std::filesystem::path& path, std::string name);
void write_series_csv(const std::filesystem::path& path, const MonthlySeries& series);

/// Throws GapInSeries / NonFiniteValue / MalformedRow for invalid series.
void validate_series(const MonthlySeries& series);

MonthlySeries compute_term_spread(const MonthlySeries& gs10, const MonthlySeries& tb3ms);

MonthlyPanel build_panel(std::span<const MonthlySeries> series, const RecessionCalendar& calendar,
                         Month start, Month end);

/// Reads `<NAME>.csv` for each canonical series from `dir`.
std::vector<MonthlySeries> load_series_dir(const std::filesystem::path& dir);

/// Calendar file: header `start,end`, rows of YYYY-MM-01 dates, end exclusive.
RecessionCalendar load_calendar_csv(const std::filesystem::path& path);
void write_calendar_csv(const std::filesystem::path& path, const RecessionCalendar& calendar);

}  // namespace cyclecast
