#include "cyclecast/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "cyclecast/error.hpp"

namespace cyclecast {

std::vector<double> first_derivative(std::span<const double> x) {
  if (x.size() < 2) fail(ErrorKind::TooShort, "first derivative needs at least 2 values");
  std::vector<double> out(x.size() - 1);
  for (std::size_t t = 1; t < x.size(); ++t) out[t - 1] = (x[t] - x[t - 1]) / 2.0;
  return out;
}

std::vector<double> second_derivative(std::span<const double> x) {
  if (x.size() < 3) fail(ErrorKind::TooShort, "second derivative needs at least 3 values");
  auto d1 = first_derivative(x);
  return first_derivative(d1);
}

FeaturePanel build_feature_panel(const MonthlyPanel& panel) {
  if (panel.size() < 3) fail(ErrorKind::TooShort, "panel needs at least 3 months");
  const std::size_t n = panel.size() - 2;
  const std::size_t k = panel.columns.size();
  FeaturePanel fp;
  fp.months.assign(panel.months.begin() + 2, panel.months.end());
  fp.labels.assign(panel.labels.begin() + 2, panel.labels.end());
  for (const auto& name : panel.names) fp.feature_names.push_back(name);
  for (const auto& name : panel.names) fp.feature_names.push_back("d1_" + name);
  for (const auto& name : panel.names) fp.feature_names.push_back("d2_" + name);
  const std::size_t width = fp.feature_names.size();
  fp.matrix.assign(n * width, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& raw = panel.columns[c];
    auto d1 = first_derivative(raw);   // aligned to source months 1..
    auto d2 = second_derivative(raw);  // aligned to source months 2..
    for (std::size_t r = 0; r < n; ++r) {
      fp.matrix[r * width + c] = raw[r + 2];
      fp.matrix[r * width + k + c] = d1[r + 1];
      fp.matrix[r * width + 2 * k + c] = d2[r];
    }
  }
  return fp;
}

void write_feature_panel_csv(const std::filesystem::path& path, const FeaturePanel& fp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, path.string());
  out << "month";
  for (const auto& n : fp.feature_names) out << ',' << n;
  out << ",label\n";
  char buf[64];
  for (std::size_t r = 0; r < fp.rows(); ++r) {
    out << format_month(fp.months[r]);
    for (std::size_t c = 0; c < fp.cols(); ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fp.at(r, c));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << ',' << fp.labels[r] << '\n';
  }
}

std::vector<std::size_t> FeatureMask::columns() const {
  std::vector<std::size_t> cols;
  auto add_group = [&](std::size_t group) {
    for (std::size_t i = 0; i < kSeriesCount; ++i) cols.push_back(group * kSeriesCount + i);
  };
  if (raw) add_group(0);
  if (d1) add_group(1);
  if (d2) add_group(2);
  return cols;
}

std::string FeatureMask::label() const {
  std::string s;
  auto add = [&](const char* part) {
    if (!s.empty()) s += '+';
    s += part;
  };
  if (raw) add("raw");
  if (d1) add("d1");
  if (d2) add("d2");
  return s.empty() ? "none" : s;
}

Standardizer Standardizer::identity(std::size_t width) {
  Standardizer s;
  s.mean.assign(width, 0.0);
  s.stddev.assign(width, 1.0);
  return s;
}

Standardizer fit_standardizer(const FeaturePanel& fp, Month train_end) {
  std::size_t count = 0;
  while (count < fp.rows() && fp.months[count] <= train_end) ++count;
  if (count < 2) fail(ErrorKind::InvalidSplit, "standardizer needs at least 2 training months");
  Standardizer s;
  s.mean.assign(fp.cols(), 0.0);
  s.stddev.assign(fp.cols(), 0.0);
  for (std::size_t c = 0; c < fp.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < count; ++r) sum += fp.at(r, c);
    double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
      double d = fp.at(r, c) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(count));
    if (sd < Standardizer::kStdFloor) {
      s.degenerate.push_back(fp.feature_names[c]);
      sd = Standardizer::kStdFloor;
    }
    s.mean[c] = mean;
    s.stddev[c] = sd;
  }
  return s;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validate: return "validate";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split split_of(Month m, const SplitBoundaries& b) {
  if (m <= b.train_end) return Split::Train;
  if (m <= b.val_end) return Split::Validate;
  return Split::Test;
}

std::vector<LabeledWindow> build_windows(const FeaturePanel& fp, const Standardizer& standardizer,
                                         const WindowOptions& options) {
  if (options.time_step < 1) fail(ErrorKind::WindowTooLong, "time step must be >= 1");
  if (options.early_offset < 0) fail(ErrorKind::InvalidSplit, "early offset must be >= 0");
  if (!options.mask.any()) fail(ErrorKind::InvalidConfig, "feature mask selects nothing");
  if (fp.rows() == 0) fail(ErrorKind::TooShort, "empty feature panel");
  const auto& b = options.splits;
  if (!(b.train_end < b.val_end) || b.train_end < fp.months.front() || !(b.val_end < fp.months.back()))
    fail(ErrorKind::InvalidSplit, "split boundaries " + format_month(b.train_end) + "/" + format_month(b.val_end));
  const std::size_t w = static_cast<std::size_t>(options.time_step);
  const std::size_t k = static_cast<std::size_t>(options.early_offset);
  if (w > fp.rows()) fail(ErrorKind::WindowTooLong, "time step exceeds panel length");
  if (standardizer.mean.size() != fp.cols()) fail(ErrorKind::ShapeMismatch, "standardizer width");

  auto cols = options.mask.columns();
  std::vector<LabeledWindow> out;
  for (std::size_t end = w - 1; end + k < fp.rows(); ++end) {
    LabeledWindow win;
    win.end_month = fp.months[end];
    win.steps = w;
    win.width = cols.size();
    win.block.resize(w * cols.size());
    for (std::size_t t = 0; t < w; ++t) {
      std::size_t r = end + 1 - w + t;
      for (std::size_t j = 0; j < cols.size(); ++j)
        win.block[t * cols.size() + j] = standardizer.apply(cols[j], fp.at(r, cols[j]));
    }
    win.label = fp.labels[end + k];
    win.split = split_of(win.end_month, b);
    out.push_back(std::move(win));
  }
  return out;
}

std::vector<LabeledWindow> select_split(const std::vector<LabeledWindow>& windows, Split split) {
  std::vector<LabeledWindow> out;
  for (const auto& w : windows)
    if (w.split == split) out.push_back(w);
  return out;
}

MonthlyPanel perturb_series(const MonthlyPanel& panel, std::string_view name, double factor) {
  int idx = panel.column_index(name);
  if (idx < 0) fail(ErrorKind::UnknownSeries, std::string(name));
  if (!(factor >= 0.5 && factor <= 1.5)) fail(ErrorKind::InvalidConfig, "perturbation factor outside [0.5, 1.5]");
  MonthlyPanel out = panel;
  if (factor != 1.0)
    for (double& v : out.columns[static_cast<std::size_t>(idx)]) v *= factor;
  return out;
}

}  // namespace cyclecast
