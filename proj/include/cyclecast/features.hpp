#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyclecast/ingest.hpp"

namespace cyclecast {

/// Half-difference: out[t-1] = (x[t] - x[t-1]) / 2. Output is one shorter.
std::vector<double> first_derivative(std::span<const double> x);
/// first_derivative applied twice. Output is two shorter.
std::vector<double> second_derivative(std::span<const double> x);

inline constexpr std::size_t kFeatureCount = 3 * kSeriesCount;

/// Month-by-feature matrix: 14 raw columns, then 14 first derivatives, then
/// 14 second derivatives. The first two source months are dropped so every
/// column is defined on every row.
struct FeaturePanel {
  std::vector<Month> months;
  std::vector<std::string> feature_names;
  std::vector<double> matrix;  // row-major, months.size() x feature_names.size()
  std::vector<int> labels;

  std::size_t rows() const { return months.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const { return {matrix.data() + i * cols(), cols()}; }
  double at(std::size_t r, std::size_t c) const { return matrix[r * cols() + c]; }
};

FeaturePanel build_feature_panel(const MonthlyPanel& panel);

void write_feature_panel_csv(const std::filesystem::path& path, const FeaturePanel& fp);

/// Which feature groups feed the models.
struct FeatureMask {
  bool raw = true;
  bool d1 = true;
  bool d2 = true;

  bool any() const { return raw || d1 || d2; }
  std::vector<std::size_t> columns() const;
  std::size_t width() const { return columns().size(); }
  std::string label() const;  // e.g. "raw+d1+d2"
};

/// Per-feature z-scoring with training-period statistics (population std).
struct Standardizer {
  static constexpr double kStdFloor = 1e-8;

  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> degenerate;  // features whose std was floored

  static Standardizer identity(std::size_t width);
  double apply(std::size_t feature, double value) const { return (value - mean[feature]) / stddev[feature]; }
};

Standardizer fit_standardizer(const FeaturePanel& fp, Month train_end);

enum class Split { Train, Validate, Test };
std::string_view to_string(Split s);

struct SplitBoundaries {
  Month train_end = make_month(1991, 12);
  Month val_end = make_month(2003, 12);
};

Split split_of(Month m, const SplitBoundaries& b);

/// A w-by-d block of standardized features ending at end_month, labelled with
/// the recession flag k months later.
struct LabeledWindow {
  Month end_month;
  std::size_t steps = 0;
  std::size_t width = 0;
  std::vector<double> block;  // row-major steps x width
  int label = 0;
  Split split = Split::Train;

  double at(std::size_t t, std::size_t f) const { return block[t * width + f]; }
};

struct WindowOptions {
  int time_step = 6;
  int early_offset = 0;
  SplitBoundaries splits;
  FeatureMask mask;
};

std::vector<LabeledWindow> build_windows(const FeaturePanel& fp, const Standardizer& standardizer,
                                         const WindowOptions& options);

std::vector<LabeledWindow> select_split(const std::vector<LabeledWindow>& windows, Split split);

/// Copy of `panel` with one raw column scaled by `factor`.
MonthlyPanel perturb_series(const MonthlyPanel& panel, std::string_view name, double factor);

}  // namespace cyclecast
