#include "cyclecast/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cyclecast/error.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast {

namespace {

struct SpanShape {
  int start;  // month index relative to options.start
  int length;
  double severity;
  double lead;  // strength of the late-cycle signal preceding the span
};

// Rough depth of each post-1959 downturn; unknown spans default to 1.
double severity_for(Month start) {
  struct Entry {
    Month m;
    double sev;
  };
  static const Entry table[] = {
      {make_month(1960, 4), 0.8}, {make_month(1969, 12), 0.7}, {make_month(1973, 11), 1.3},
      {make_month(1980, 1), 1.0}, {make_month(1981, 7), 1.2},  {make_month(1990, 7), 0.7},
      {make_month(2001, 3), 0.6}, {make_month(2007, 12), 1.5}, {make_month(2020, 2), 3.0},
  };
  for (const auto& e : table)
    if (e.m == start) return e.sev;
  return 1.0;
}

double lead_for(Month start) {
  if (start == make_month(2020, 2)) return 0.5;
  if (start == make_month(1973, 11) || start == make_month(1980, 1)) return 1.2;
  if (start == make_month(1960, 4) || start == make_month(1990, 7)) return 0.8;
  return 1.0;
}

double year_of(Month m) { return static_cast<double>(static_cast<int>(m.year())) + (static_cast<unsigned>(m.month()) - 1) / 12.0; }

double piecewise(double year, std::initializer_list<std::pair<double, double>> knots) {
  auto it = knots.begin();
  if (year <= it->first) return it->second;
  auto prev = *it;
  for (++it; it != knots.end(); ++it) {
    if (year <= it->first) {
      double w = (year - prev.first) / (it->first - prev.first);
      return prev.second + w * (it->second - prev.second);
    }
    prev = *it;
  }
  return prev.second;
}

double round_to(double v, int digits) {
  double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

}  // namespace

std::vector<MonthlySeries> generate_surrogate_series(const RecessionCalendar& calendar,
                                                     const SurrogateOptions& options) {
  int n = months_between(options.start, options.end) + 1;
  if (n < 3) fail(ErrorKind::InvalidConfig, "surrogate range too short");
  std::size_t N = static_cast<std::size_t>(n);

  std::vector<SpanShape> spans;
  for (const auto& s : calendar.spans())
    spans.push_back({months_between(options.start, s.start), months_between(s.start, s.end), severity_for(s.start),
                     lead_for(s.start)});

  // Recession intensity, late-cycle pressure and post-recession rebound.
  std::vector<double> intensity(N, 0.0), pressure(N, 0.0), rebound(N, 0.0);
  for (std::size_t t = 0; t < N; ++t) {
    int ti = static_cast<int>(t);
    for (const auto& sp : spans) {
      int k = ti - sp.start;
      if (k >= 0 && k < sp.length)
        intensity[t] += sp.severity * (0.4 + 0.6 * std::sin(std::numbers::pi * (k + 0.5) / sp.length));
      double before = static_cast<double>(sp.start - ti);
      if (before > 0) pressure[t] += sp.lead * std::exp(-std::pow((before - 10.0) / 6.0, 2));
      int after = ti - (sp.start + sp.length);
      if (after >= 0 && after < 18) rebound[t] += sp.severity * std::exp(-after / 6.0);
    }
  }

  Rng rng(options.seed);
  std::vector<double> cpi(N), ppi(N), tb3(N), gs10(N), baa(N), indpro(N), ipmat(N), cu(N), manemp(N), usgood(N),
      unrate(N), oil(N), ism(N);

  double infl = 1.5, log_cpi = std::log(29.0), log_ppi = std::log(31.0);
  double rate = 2.8, longrate = 4.0, spread = 0.9;
  double log_ip = std::log(22.5), log_mat = std::log(24.0), util = 81.0;
  double log_man = std::log(15400.0), log_goods = std::log(19900.0), unemp = 6.0;
  double oil_dev = 0.0, pmi = 52.0, ip_smooth = 0.0;

  for (std::size_t t = 0; t < N; ++t) {
    Month m = add_months(options.start, static_cast<int>(t));
    double y = year_of(m);
    double I = intensity[t], P = pressure[t], R = rebound[t];

    double infl_base = piecewise(y, {{1965, 1.5}, {1968, 4.5}, {1973, 5.0}, {1975, 9.0}, {1981, 9.5}, {1983, 4.0},
                                     {1990, 4.2}, {1992, 2.8}, {2007, 2.7}, {2009, 1.8}, {2020, 1.8}});
    infl = 0.9 * infl + 0.1 * infl_base + rng.normal(0.0, 0.6) - 1.2 * I + 0.3 * P;
    log_cpi += infl / 1200.0 + rng.normal(0.0, 0.0012);
    log_ppi += (infl + 0.8 * P) / 1200.0 - 0.003 * I + rng.normal(0.0, 0.005);

    double neutral = piecewise(y, {{1999, 1.5}, {2001, 0.8}, {2008, 0.5}, {2009.5, -2.5}, {2015.5, -2.5}, {2018, -0.6}});
    double target = neutral + 1.25 * infl + 2.2 * P - 2.5 * I;
    rate += 0.15 * (target - rate) + rng.normal(0.0, 0.18);
    rate = std::max(rate, 0.02);

    double long_target = rate + 1.3 - 1.9 * P + 1.2 * I;
    longrate += 0.12 * (long_target - longrate) + rng.normal(0.0, 0.14);
    longrate = std::max(longrate, 0.5);

    double spread_base = piecewise(y, {{1966, 0.8}, {1975, 1.8}, {2020, 2.1}});
    spread += 0.1 * (spread_base + 0.35 * P + 1.5 * I - spread) + rng.normal(0.0, 0.07);
    spread = std::max(spread, 0.3);

    double drift = piecewise(y, {{1999, 0.30}, {2002, 0.12}, {2020, 0.10}});
    double ip_growth = drift - 0.15 * P - 1.6 * I + 0.55 * R + rng.normal(0.0, 0.65);
    log_ip += ip_growth / 100.0;
    ip_smooth = 0.7 * ip_smooth + 0.3 * (ip_growth - drift);
    log_mat += (drift + 1.2 * (ip_growth - drift) + rng.normal(0.0, 0.55)) / 100.0;

    double util_target = piecewise(y, {{1966, 84.0}, {2000, 80.0}, {2020, 76.0}});
    util += 0.55 * (ip_growth - drift) + 0.06 * (util_target - util) + rng.normal(0.0, 0.25);

    double man_trend = piecewise(y, {{1979, 0.08}, {1981, -0.02}, {2000, -0.02}, {2002, -0.25}, {2010, -0.25}, {2011, 0.05}});
    log_man += (man_trend + 0.35 * ip_smooth + rng.normal(0.0, 0.12)) / 100.0;
    log_goods += (man_trend + 0.06 + 0.38 * ip_smooth + rng.normal(0.0, 0.14)) / 100.0;

    double natural = piecewise(y, {{1968, 5.0}, {1975, 6.5}, {1987, 6.5}, {1995, 5.2}, {2020, 4.6}});
    unemp += -0.32 * ip_smooth + 0.03 * (natural - unemp) + rng.normal(0.0, 0.11);
    unemp = std::clamp(unemp, 2.5, 20.0);

    double oil_anchor = std::log(piecewise(y, {{1970.9, 3.0},   {1971.1, 3.56},  {1973.9, 4.3},  {1974.1, 10.1},
                                               {1978.9, 14.9},  {1980.5, 37.0},  {1983, 30.0},   {1986.2, 13.5},
                                               {1990.5, 20.0},  {1990.8, 33.0},  {1991.5, 21.0}, {1998.9, 12.0},
                                               {2000.5, 30.0},  {2004, 36.0},    {2008.5, 133.0}, {2008.95, 41.0},
                                               {2011, 90.0},    {2014.5, 103.0}, {2016, 31.0},   {2018.8, 70.0},
                                               {2019.9, 59.0},  {2020.3, 17.0},  {2020.5, 38.0}}));
    double oil_vol = y < 1973.5 ? 0.004 : 0.06;
    oil_dev = 0.85 * oil_dev + rng.normal(0.0, oil_vol);
    double log_oil = oil_anchor + oil_dev - (y < 1973.5 ? 0.0 : 0.08 * I);

    pmi = 0.6 * pmi + 0.4 * (53.0 - 5.0 * P - 8.0 * I + 3.5 * R) + rng.normal(0.0, 1.6);

    cpi[t] = round_to(std::exp(log_cpi), 3);
    ppi[t] = round_to(std::exp(log_ppi), 1);
    tb3[t] = round_to(rate, 2);
    gs10[t] = round_to(longrate, 2);
    baa[t] = round_to(longrate + spread, 2);
    indpro[t] = round_to(std::exp(log_ip), 4);
    ipmat[t] = round_to(std::exp(log_mat), 4);
    cu[t] = round_to(util, 4);
    manemp[t] = std::round(std::exp(log_man));
    usgood[t] = std::round(std::exp(log_goods));
    unrate[t] = round_to(unemp, 1);
    oil[t] = round_to(std::exp(log_oil), 2);
    ism[t] = round_to(pmi, 1);
  }

  auto make = [&](std::string_view name, const std::vector<double>& values) {
    MonthlySeries s;
    s.name = std::string(name);
    s.unit = std::string(kCanonicalSeries[static_cast<std::size_t>(canonical_series_index(name))].unit);
    s.observations.reserve(N);
    for (std::size_t t = 0; t < N; ++t) s.observations.push_back({add_months(options.start, static_cast<int>(t)), values[t]});
    return s;
  };

  MonthlySeries gs10_series = make("GS10", gs10);
  MonthlySeries tb3_series = make("TB3MS", tb3);
  MonthlySeries spread_series = compute_term_spread(gs10_series, tb3_series);
  for (auto& o : spread_series.observations) o.value = round_to(o.value, 2);

  return {make("BAA", baa),       make("CUMFNS", cu),         make("INDPRO", indpro),   make("IPMAT", ipmat),
          make("MANEMP", manemp), make("USGOOD", usgood),     make("UNRATE", unrate),   tb3_series,
          gs10_series,            spread_series,              make("WTISPLC", oil),     make("PPIACO", ppi),
          make("CPIAUCSL", cpi),  make("ISM", ism)};
}

}  // namespace cyclecast
