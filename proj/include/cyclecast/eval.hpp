#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cyclecast {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

/// Counts predictions against labels with `positive` as the positive class.
Confusion confusion(std::span<const int> predicted, std::span<const int> actual, int positive = 1);

struct Metrics {
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Undefined ratios (0/0) are reported as 0.
Metrics metrics(const Confusion& c);

/// Metrics with recession (1) and expansion (0) each taken as positive.
struct RunMetrics {
  Metrics recession;
  Metrics expansion;
};

RunMetrics evaluate(std::span<const int> predicted, std::span<const int> actual);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std
};

MeanStd mean_std(std::span<const double> values);

struct ClassMetrics {
  std::size_t runs = 0;
  MeanStd accuracy;
  struct PerClass {
    MeanStd recall, precision, f1;
  } recession, expansion;
};

ClassMetrics aggregate_runs(std::span<const RunMetrics> runs);

/// Two-sided Welch t-test p-value. A sample with zero variance is treated as
/// a constant; if both are constant the result is 1 for equal means, else 0.
double welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace cyclecast
