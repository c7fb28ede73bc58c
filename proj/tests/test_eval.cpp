#include <cmath>

#include <gtest/gtest.h>

#include "cyclecast/eval.hpp"
#include "metric_oracle.hpp"
#include "test_support.hpp"

namespace cc = cyclecast;

TEST(Confusion, Counts) {
  std::vector<int> pred{1, 1, 0, 0, 1, 0};
  std::vector<int> act{1, 0, 1, 0, 1, 0};
  EXPECT_EQ(cc::confusion(pred, act), (cc::Confusion{2, 1, 1, 2}));
  EXPECT_EQ(cc::confusion(pred, act, 0), (cc::Confusion{2, 1, 1, 2}));
  std::vector<int> short_act{1, 0};
  EXPECT_ERROR_KIND(cc::confusion(pred, short_act), cc::ErrorKind::LengthMismatch);
}

TEST(Metrics, NaivePredictorOnTestSplit) {
  std::vector<int> actual(198, 0);
  for (int i = 0; i < 23; ++i) actual[static_cast<std::size_t>(i * 8)] = 1;
  std::vector<int> pred(198, 0);
  auto c = cc::confusion(pred, actual);
  EXPECT_EQ(c.tn, 175u);
  EXPECT_EQ(c.fn, 23u);
  auto r = cc::evaluate(pred, actual);
  EXPECT_NEAR(r.recession.accuracy, 0.8838, 0.00005);
  EXPECT_EQ(r.recession.recall, 0.0);
  EXPECT_EQ(r.recession.precision, 0.0);
  EXPECT_EQ(r.recession.f1, 0.0);
  EXPECT_EQ(r.expansion.recall, 1.0);
  EXPECT_NEAR(r.expansion.precision, 175.0 / 198.0, 1e-15);
}

TEST(Metrics, HandExample) {
  auto m = cc::metrics(cc::Confusion{2, 1, 1, 2});
  EXPECT_DOUBLE_EQ(m.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_ERROR_KIND(cc::metrics(cc::Confusion{}), cc::ErrorKind::EmptyEvaluation);
}

TEST(Metrics, AgreeWithBruteForceOracle) { EXPECT_LE(cc::testing::metric_oracle_max_error(10000, 17), 1e-12); }

TEST(Metrics, Bounds) {
  cc::Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> p(50), a(50);
    for (int i = 0; i < 50; ++i) p[i] = rng.uniform() < 0.3, a[i] = rng.uniform() < 0.2;
    auto r = cc::evaluate(p, a);
    for (double v : {r.recession.accuracy, r.recession.recall, r.recession.precision, r.recession.f1, r.expansion.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(r.recession.accuracy, r.expansion.accuracy);
    EXPECT_LE(r.recession.f1, std::max(r.recession.recall, r.recession.precision) + 1e-15);
  }
}

TEST(Aggregate, IdenticalRunsHaveExactlyZeroStd) {
  for (double v : {0.898989898989899, 0.8838383838383839, 0.1, 1.0 / 3.0}) {
    const std::vector<double> same(10, v);
    auto ms = cc::mean_std(same);
    EXPECT_EQ(ms.mean, v);
    EXPECT_EQ(ms.std, 0.0);
  }
}

TEST(Aggregate, MeanAndPopulationStd) {
  auto ms = cc::mean_std(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_DOUBLE_EQ(ms.std, std::sqrt(1.25));
  std::vector<cc::RunMetrics> runs(3);
  for (std::size_t i = 0; i < 3; ++i) runs[i].recession.f1 = 0.5, runs[i].recession.accuracy = 0.9 + 0.01 * i;
  auto agg = cc::aggregate_runs(runs);
  EXPECT_EQ(agg.runs, 3u);
  EXPECT_EQ(agg.recession.f1.std, 0.0);
  EXPECT_NEAR(agg.accuracy.mean, 0.91, 1e-15);
  EXPECT_ERROR_KIND(cc::aggregate_runs(std::span<const cc::RunMetrics>{}), cc::ErrorKind::InsufficientRuns);
}

TEST(Welch, MatchesReferenceValues) {
  // Reference p-values from an independent statistics package.
  EXPECT_NEAR(cc::welch_t_test(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 4, 6, 8, 10}),
              0.10753119493062718, 1e-10);
  EXPECT_NEAR(cc::welch_t_test(std::vector<double>{0.81, 0.79, 0.85, 0.60, 0.90},
                               std::vector<double>{0.39, 0.39, 0.40, 0.38, 0.41}),
              0.0014031232526209388, 1e-10);
  EXPECT_NEAR(cc::welch_t_test(std::vector<double>{0.1, 0.2}, std::vector<double>{0.1, 0.2, 0.3}), 0.5611508812400859,
              1e-10);
}

TEST(Welch, SeparatedSamplesAndEdgeCases) {
  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) a.push_back(0.90 + 0.001 * i), b.push_back(0.40 + 0.001 * i);
  EXPECT_LT(cc::welch_t_test(a, b), 1e-6);
  EXPECT_NEAR(cc::welch_t_test(a, a), 1.0, 1e-12);
  std::vector<double> c{0.5, 0.5, 0.5}, d{0.5, 0.5}, e{0.4, 0.4};
  EXPECT_EQ(cc::welch_t_test(c, d), 1.0);
  EXPECT_EQ(cc::welch_t_test(c, e), 0.0);
  EXPECT_ERROR_KIND(cc::welch_t_test(std::vector<double>{1.0}, a), cc::ErrorKind::InsufficientRuns);
}
