#include "cyclecast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cyclecast/error.hpp"

namespace cyclecast {

std::vector<double> MonthlySeries::values() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.value);
  return out;
}

int canonical_series_index(std::string_view name) {
  for (std::size_t i = 0; i < kCanonicalSeries.size(); ++i)
    if (kCanonicalSeries[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::string_view unit_for(std::string_view name) {
  int idx = canonical_series_index(name);
  return idx >= 0 ? kCanonicalSeries[static_cast<std::size_t>(idx)].unit : std::string_view{};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string line_tag(const std::string& name, std::size_t line) {
  return name + " line " + std::to_string(line);
}

}  // namespace

void validate_series(const MonthlySeries& series) {
  for (std::size_t i = 0; i < series.observations.size(); ++i) {
    const auto& o = series.observations[i];
    if (!std::isfinite(o.value)) fail(ErrorKind::NonFiniteValue, series.name + " " + format_month(o.month));
    if (i > 0) {
      Month prev = series.observations[i - 1].month;
      int step = months_between(prev, o.month);
      if (step <= 0)
        fail(ErrorKind::MalformedRow, series.name + " months not increasing at " + format_month(o.month));
      if (step > 1) fail(ErrorKind::GapInSeries, series.name + " " + format_month(add_months(prev, 1)));
    }
  }
}

MonthlySeries parse_series_csv(std::string_view text, std::string name) {
  MonthlySeries series;
  series.unit = std::string(unit_for(name));
  series.name = std::move(name);
  auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]).empty()) fail(ErrorKind::MalformedRow, line_tag(series.name, 1) + " missing header");
  {
    std::string_view header = trim(lines[0]);
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.remove_prefix(3);  // BOM
    auto comma = header.find(',');
    std::string_view first = header.substr(0, comma);
    if (comma == std::string_view::npos || (first != "DATE" && first != "observation_date"))
      fail(ErrorKind::MalformedRow, line_tag(series.name, 1) + " expected header DATE,VALUE");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::size_t lineno = i + 1;
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      fail(ErrorKind::MalformedRow, line_tag(series.name, lineno));
    Month m;
    if (!try_parse_month(trim(line.substr(0, comma)), m)) fail(ErrorKind::MalformedRow, line_tag(series.name, lineno));
    std::string_view cell = trim(line.substr(comma + 1));
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
      fail(ErrorKind::MalformedRow, line_tag(series.name, lineno) + " value '" + std::string(cell) + "'");
    series.observations.push_back({m, value});
  }
  validate_series(series);
  return series;
}

MonthlySeries load_series_csv(const std::filesystem::path& path, std::string name) {
  return parse_series_csv(read_file(path), std::move(name));
}

void write_series_csv(const std::filesystem::path& path, const MonthlySeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, path.string());
  out << "DATE,VALUE\n";
  char buf[64];
  for (const auto& o : series.observations) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, o.value);
    out << format_fred_date(o.month) << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
  }
}

MonthlySeries compute_term_spread(const MonthlySeries& gs10, const MonthlySeries& tb3ms) {
  if (gs10.size() != tb3ms.size() || gs10.empty() || gs10.first() != tb3ms.first())
    fail(ErrorKind::MisalignedSeries, gs10.name + " vs " + tb3ms.name);
  MonthlySeries out;
  out.name = "T10Y3M";
  out.unit = "Percent";
  out.observations.reserve(gs10.size());
  for (std::size_t i = 0; i < gs10.size(); ++i) {
    if (gs10.observations[i].month != tb3ms.observations[i].month)
      fail(ErrorKind::MisalignedSeries, format_month(gs10.observations[i].month));
    out.observations.push_back({gs10.observations[i].month, gs10.observations[i].value - tb3ms.observations[i].value});
  }
  return out;
}

RecessionCalendar::RecessionCalendar(std::vector<RecessionSpan> spans) : spans_(std::move(spans)) {
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    if (months_between(spans_[i].start, spans_[i].end) < 1)
      fail(ErrorKind::InvalidConfig, "recession span shorter than one month at " + format_month(spans_[i].start));
    if (i > 0 && spans_[i].start < spans_[i - 1].end)
      fail(ErrorKind::InvalidConfig, "recession spans overlap or unsorted at " + format_month(spans_[i].start));
  }
}

RecessionCalendar RecessionCalendar::canonical() {
  return RecessionCalendar({
      {make_month(1960, 4), make_month(1961, 2)},
      {make_month(1969, 12), make_month(1970, 11)},
      {make_month(1973, 11), make_month(1975, 3)},
      {make_month(1980, 1), make_month(1980, 7)},
      {make_month(1981, 7), make_month(1982, 11)},
      {make_month(1990, 7), make_month(1991, 3)},
      {make_month(2001, 3), make_month(2001, 11)},
      {make_month(2007, 12), make_month(2009, 6)},
      {make_month(2020, 2), make_month(2020, 7)},
  });
}

bool RecessionCalendar::in_recession(Month m) const {
  return std::any_of(spans_.begin(), spans_.end(), [m](const RecessionSpan& s) { return m >= s.start && m < s.end; });
}

int MonthlyPanel::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& MonthlyPanel::column(std::string_view name) const {
  int idx = column_index(name);
  if (idx < 0) fail(ErrorKind::UnknownSeries, std::string(name));
  return columns[static_cast<std::size_t>(idx)];
}

MonthlyPanel build_panel(std::span<const MonthlySeries> series, const RecessionCalendar& calendar, Month start,
                         Month end) {
  if (end < start) fail(ErrorKind::InvalidSplit, "panel end before start");
  for (const auto& info : kCanonicalSeries) {
    bool found = std::any_of(series.begin(), series.end(), [&](const MonthlySeries& s) { return s.name == info.name; });
    if (!found) fail(ErrorKind::SeriesMissing, std::string(info.name));
  }
  int n = months_between(start, end) + 1;
  MonthlyPanel panel;
  panel.months.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) panel.months.push_back(add_months(start, i));
  for (const auto& info : kCanonicalSeries) {
    const auto& s = *std::find_if(series.begin(), series.end(), [&](const MonthlySeries& x) { return x.name == info.name; });
    validate_series(s);
    if (s.empty() || s.first() > start) fail(ErrorKind::CoverageGap, s.name + " " + format_month(start));
    if (s.last() < end) fail(ErrorKind::CoverageGap, s.name + " " + format_month(add_months(s.last(), 1)));
    std::size_t offset = static_cast<std::size_t>(months_between(s.first(), start));
    std::vector<double> col(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = s.observations[offset + i].value;
    panel.names.emplace_back(info.name);
    panel.columns.push_back(std::move(col));
  }
  panel.labels.reserve(panel.months.size());
  for (Month m : panel.months) panel.labels.push_back(calendar.in_recession(m) ? 1 : 0);
  return panel;
}

std::vector<MonthlySeries> load_series_dir(const std::filesystem::path& dir) {
  std::vector<MonthlySeries> out;
  for (const auto& info : kCanonicalSeries)
    out.push_back(load_series_csv(dir / (std::string(info.name) + ".csv"), std::string(info.name)));
  return out;
}

RecessionCalendar load_calendar_csv(const std::filesystem::path& path) {
  std::string text = read_file(path);
  auto lines = split_lines(text);
  std::vector<RecessionSpan> spans;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    auto comma = line.find(',');
    Month a, b;
    if (comma == std::string_view::npos || !try_parse_month(trim(line.substr(0, comma)), a) ||
        !try_parse_month(trim(line.substr(comma + 1)), b))
      fail(ErrorKind::MalformedRow, path.string() + " line " + std::to_string(i + 1));
    spans.push_back({a, b});
  }
  return RecessionCalendar(std::move(spans));
}

void write_calendar_csv(const std::filesystem::path& path, const RecessionCalendar& calendar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, path.string());
  out << "start,end\n";
  for (const auto& s : calendar.spans()) out << format_fred_date(s.start) << ',' << format_fred_date(s.end) << '\n';
}

}  // namespace cyclecast
