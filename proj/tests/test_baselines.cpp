#include <cmath>

#include <gtest/gtest.h>

#include "cyclecast/baselines.hpp"
#include "test_support.hpp"

namespace cc = cyclecast;

namespace {

std::vector<cc::LabeledWindow> synthetic_windows(std::size_t n, std::size_t steps, std::size_t width, double shift,
                                                 std::uint64_t seed) {
  cc::Rng rng(seed);
  std::vector<cc::LabeledWindow> out;
  for (std::size_t i = 0; i < n; ++i) {
    cc::LabeledWindow w;
    w.end_month = cc::add_months(cc::make_month(1990, 1), static_cast<int>(i));
    w.steps = steps;
    w.width = width;
    w.label = (i % 3 == 0) ? 1 : 0;
    for (std::size_t k = 0; k < steps * width; ++k) w.block.push_back(rng.normal() + (w.label ? shift : -shift));
    out.push_back(std::move(w));
  }
  return out;
}

double accuracy(const std::vector<cc::Prediction>& p, const std::vector<cc::LabeledWindow>& w) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i].label == w[i].label;
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

// Parameter count of an LSTM stack with the per-step output layer.
std::size_t stack_count(std::size_t input, const std::vector<std::size_t>& sizes, bool bidir) {
  std::size_t n = 0, in = input, dirs = bidir ? 2 : 1;
  for (std::size_t h : sizes) {
    n += dirs * ((in + h) * 4 * h + 4 * h);
    in = dirs * h;
  }
  return n + in + 1;
}

}  // namespace

TEST(NormalCdf, Values) {
  EXPECT_NEAR(cc::normal_cdf(1.959964), 0.975, 1e-6);
  EXPECT_EQ(cc::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(cc::normal_cdf(-1.0), 0.15865525393145707, 1e-15);
  for (double x = -8.0; x <= 8.0; x += 0.37) EXPECT_NEAR(cc::normal_cdf(x) + cc::normal_cdf(-x), 1.0, 1e-15);
  EXPECT_GT(cc::normal_cdf(-37.0), 0.0);
}

TEST(Names, RoundTrip) {
  for (auto k : cc::kAllBaselines) EXPECT_EQ(cc::parse_baseline(cc::to_string(k)), k);
  EXPECT_ERROR_KIND(cc::parse_baseline("xgboost"), cc::ErrorKind::InvalidConfig);
  EXPECT_TRUE(cc::is_deterministic(cc::BaselineKind::Probit));
  EXPECT_FALSE(cc::is_deterministic(cc::BaselineKind::Dnn));
}

TEST(Logistic, SeparableDataFitsPerfectly) {
  cc::Rng rng(1);
  Eigen::MatrixXd x(200, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    x(i, 1) = rng.uniform(-1, 1);
    double s = 2 * x(i, 0) - x(i, 1) + 0.1;
    if (std::abs(s) < 0.1) x(i, 0) += s > 0 ? 0.1 : -0.1;
    y(i) = 2 * x(i, 0) - x(i, 1) + 0.1 > 0 ? 1 : 0;
  }
  auto m = cc::fit_logistic(x, y, 1e-3);
  Eigen::VectorXd s = (x * m.coef).array() + m.intercept;
  for (int i = 0; i < 200; ++i) EXPECT_EQ(s(i) > 0 ? 1 : 0, y(i)) << i;
}

TEST(Logistic, RidgeShrinks) {
  cc::Rng rng(2);
  Eigen::MatrixXd x(300, 3);
  Eigen::VectorXd y(300);
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
    y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-(x(i, 0) - x(i, 2)))) ? 1 : 0;
  }
  EXPECT_GT(cc::fit_logistic(x, y, 1e-3).coef.norm(), cc::fit_logistic(x, y, 100.0).coef.norm());
}

TEST(Probit, RecoversCoefficients) {
  cc::Rng rng(3);
  const int n = 5000;
  Eigen::Vector3d beta(0.8, -0.5, 0.3);
  const double b0 = -0.2;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
    y(i) = x.row(i).dot(beta) + b0 + rng.normal() > 0 ? 1 : 0;
  }
  auto m = cc::fit_probit(x, y);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.coef(j), beta(j), 0.1 * std::abs(beta(j))) << j;
  EXPECT_NEAR(m.intercept, b0, 0.1 * std::abs(b0));
  EXPECT_LE(m.iterations, 100u);
}

TEST(Svm, SeparatesShiftedClasses) {
  auto tr = synthetic_windows(120, 2, 3, 1.5, 4);
  auto x = cc::flatten_windows(tr);
  auto y = cc::window_labels(tr);
  auto m = cc::fit_svm(x, y, 1.0, 2000);
  Eigen::VectorXd s = (x * m.coef).array() + m.intercept;
  int ok = 0;
  for (int i = 0; i < s.size(); ++i) ok += (s(i) >= 0 ? 1 : 0) == y(i);
  EXPECT_GT(ok, 115);
}

TEST(Flatten, RowMajorWindows) {
  auto w = synthetic_windows(3, 2, 4, 0.0, 5);
  auto x = cc::flatten_windows(w);
  ASSERT_EQ(x.rows(), 3);
  ASSERT_EQ(x.cols(), 8);
  EXPECT_EQ(x(1, 5), w[1].at(1, 1));
  EXPECT_EQ(cc::window_labels(w)(0), 1.0);
}

TEST(Predict, ZeroWeightsGiveHalf) {
  cc::BaselineModel m;
  m.kind = cc::BaselineKind::Logistic;
  m.input_width = 8;
  m.linear = cc::LinearModel{Eigen::VectorXd::Zero(8), 0.0, 0};
  auto w = synthetic_windows(5, 2, 4, 0.0, 6);
  for (auto kind : {cc::BaselineKind::Logistic, cc::BaselineKind::Probit, cc::BaselineKind::Svm}) {
    m.kind = kind;
    for (const auto& p : cc::predict_baseline(m, w)) EXPECT_EQ(p.probability, 0.5);
  }
  m.input_width = 9;
  EXPECT_ERROR_KIND(cc::predict_baseline(m, w), cc::ErrorKind::ShapeMismatch);
}

class BaselineTraining : public ::testing::Test {
 protected:
  std::vector<cc::LabeledWindow> train_ = synthetic_windows(90, 4, 5, 0.6, 7);
  std::vector<cc::LabeledWindow> val_ = synthetic_windows(45, 4, 5, 0.6, 8);
  std::vector<cc::LabeledWindow> test_ = synthetic_windows(60, 4, 5, 0.6, 9);

  cc::BaselineConfig config(std::uint64_t seed) const {
    cc::BaselineConfig c;
    c.seed = seed;
    c.epochs = 60;
    c.learning_rate = 1e-2;
    c.lstm_sizes = {6, 4};
    c.svm_iterations = 500;
    return c;
  }
};

TEST_F(BaselineTraining, EveryKindLearns) {
  for (auto kind : cc::kAllBaselines) {
    auto m = cc::train_baseline(kind, train_, val_, config(0));
    auto p = cc::predict_baseline(m, test_);
    ASSERT_EQ(p.size(), test_.size());
    EXPECT_GT(accuracy(p, test_), 0.75) << cc::to_string(kind);
    for (const auto& q : p) {
      EXPECT_GE(q.probability, 0.0);
      EXPECT_LE(q.probability, 1.0);
    }
  }
}

TEST_F(BaselineTraining, DeterministicKindsIgnoreSeed) {
  for (auto kind : cc::kAllBaselines) {
    auto a = cc::predict_baseline(cc::train_baseline(kind, train_, val_, config(0)), test_);
    auto b = cc::predict_baseline(cc::train_baseline(kind, train_, val_, config(1)), test_);
    auto a2 = cc::predict_baseline(cc::train_baseline(kind, train_, val_, config(0)), test_);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a[i].probability == b[i].probability;
      EXPECT_EQ(a[i].probability, a2[i].probability) << cc::to_string(kind);
    }
    EXPECT_EQ(same, cc::is_deterministic(kind)) << cc::to_string(kind);
  }
}

TEST_F(BaselineTraining, RecurrentParameterCounts) {
  auto c = config(0);
  auto lstm = cc::train_baseline(cc::BaselineKind::Lstm, train_, val_, c);
  auto bilstm = cc::train_baseline(cc::BaselineKind::Bilstm, train_, val_, c);
  EXPECT_EQ(lstm.parameter_count(), stack_count(5, c.lstm_sizes, false));
  EXPECT_EQ(bilstm.parameter_count(), stack_count(5, c.lstm_sizes, true));
  EXPECT_EQ(stack_count(42, {24, 12, 8}, false), 8889u);
  EXPECT_EQ(stack_count(42, {24, 12, 8}, true), 20849u);
}

TEST_F(BaselineTraining, AutoencoderReconstructionFallsAtSmallRate) {
  auto c = config(0);
  c.learning_rate = 1e-4;
  c.epochs = 50;
  auto h = cc::autoencoder_reconstruction_history(train_, c);
  ASSERT_EQ(h.size(), 50u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]) << i;
}

TEST_F(BaselineTraining, TunedHyperparameterFromGrid) {
  auto c = config(0);
  auto lr = cc::train_baseline(cc::BaselineKind::Logistic, train_, val_, c);
  EXPECT_NE(std::find(c.logistic_lambdas.begin(), c.logistic_lambdas.end(), lr.hyperparameter), c.logistic_lambdas.end());
  auto svm = cc::train_baseline(cc::BaselineKind::Svm, train_, val_, c);
  EXPECT_NE(std::find(c.svm_cs.begin(), c.svm_cs.end(), svm.hyperparameter), c.svm_cs.end());
}
