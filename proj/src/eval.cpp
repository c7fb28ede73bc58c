#include "cyclecast/eval.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

Confusion confusion(std::span<const int> predicted, std::span<const int> actual, int positive) {
  if (predicted.size() != actual.size())
    fail(ErrorKind::LengthMismatch,
         std::to_string(predicted.size()) + " predictions vs " + std::to_string(actual.size()) + " labels");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == positive;
    const bool a = actual[i] == positive;
    if (p && a) ++c.tp;
    else if (p) ++c.fp;
    else if (a) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics metrics(const Confusion& c) {
  if (c.total() == 0) fail(ErrorKind::EmptyEvaluation, "no windows to evaluate");
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

RunMetrics evaluate(std::span<const int> predicted, std::span<const int> actual) {
  return {metrics(confusion(predicted, actual, 1)), metrics(confusion(predicted, actual, 0))};
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  // Shifted by the first value so identical runs give exactly zero spread.
  const double n = static_cast<double>(values.size());
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double offset = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - shift - offset) * (v - shift - offset);
  return {shift + offset, std::sqrt(ss / n)};
}

ClassMetrics aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) fail(ErrorKind::InsufficientRuns, "aggregate_runs needs at least one run");
  auto collect = [&](auto pick) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(pick(r));
    return mean_std(v);
  };
  ClassMetrics out;
  out.runs = runs.size();
  out.accuracy = collect([](const RunMetrics& r) { return r.recession.accuracy; });
  out.recession.recall = collect([](const RunMetrics& r) { return r.recession.recall; });
  out.recession.precision = collect([](const RunMetrics& r) { return r.recession.precision; });
  out.recession.f1 = collect([](const RunMetrics& r) { return r.recession.f1; });
  out.expansion.recall = collect([](const RunMetrics& r) { return r.expansion.recall; });
  out.expansion.precision = collect([](const RunMetrics& r) { return r.expansion.precision; });
  out.expansion.f1 = collect([](const RunMetrics& r) { return r.expansion.f1; });
  return out;
}

double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorKind::InsufficientRuns, "each sample needs at least two values");
  auto moments = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  if (sa + sb == 0.0) return ma == mb ? 1.0 : 0.0;
  const double t = (ma - mb) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace cyclecast
