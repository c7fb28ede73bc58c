#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclecast/baselines.hpp"
#include "cyclecast/eval.hpp"
#include "cyclecast/features.hpp"
#include "cyclecast/model.hpp"

namespace cyclecast {

inline constexpr std::string_view kMainModel = "bilstm_aa";

struct SensitivitySettings {
  std::vector<std::string> series{"BAA", "INDPRO"};
  std::vector<double> factors{0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
  std::string checkpoint;  // empty: train one with the first seed
};

/// Declarative description of one experiment. Field names match the JSON
/// config file.
struct ExperimentConfig {
  std::string experiment = "main";
  std::string data_dir = "data/canonical";
  std::string calendar = "data/nber_recessions.csv";
  bool fetch = false;  // refresh data_dir from FRED before running
  Month start = kCanonicalStart;
  Month end = kCanonicalEnd;
  SplitBoundaries splits;
  int time_step = 6;
  int early_offset = 0;
  FeatureMask features;
  bool attention = true;
  bool bidirectional = true;
  bool autoencoder = true;
  LossWeights weights;
  bool tune_loss_weights = false;
  std::vector<double> alpha_grid{0.1, 1.0, 10.0};
  std::vector<double> beta_grid{1e-5, 1e-4, 1e-3};
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  double threshold = 0.5;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool standardize = true;
  bool sigmoid_head = false;
  std::size_t bottleneck = 4;
  bool lstm_relu_gates = false;
  std::vector<std::string> models{"bilstm_aa", "svm", "logistic", "probit", "lstm", "bilstm", "autoencoder", "dnn"};
  std::vector<int> early_offsets{1, 2, 3, 4, 5, 6};
  int early_table_offset = 3;  // offset at which every model is compared
  std::vector<int> timesteps{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  SensitivitySettings sensitivity;
};

/// Missing fields keep their defaults; unknown fields and invalid values raise
/// InvalidConfig.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& c);
/// Throws InvalidConfig / InvalidSplit for inconsistent settings.
void validate_config(const ExperimentConfig& c);
/// FNV-1a 64 of the canonical (sorted-key) JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
/// Hash over months, labels, splits and every feature value of the windows.
std::string window_hash(const std::vector<LabeledWindow>& windows);

struct PreparedData {
  MonthlyPanel panel;
  FeaturePanel features;
  Standardizer standardizer;
  std::vector<LabeledWindow> train, validate, test;
  std::string window_hash;
};

MonthlyPanel load_panel(const ExperimentConfig& c);
PreparedData prepare_data(const ExperimentConfig& c, const MonthlyPanel& panel);

struct RunOutcome {
  std::string model;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<Prediction> test_predictions;
  double val_f1 = 0.0;
  std::size_t best_epoch = 0;
  double hyperparameter = 0.0;
  std::size_t parameter_count = 0;
  LossBreakdown final_loss;  // main model only: components at the chosen epoch
  std::vector<NamedTensor> checkpoint;  // main model only
};

/// Trains and evaluates one model for one seed on prepared data.
RunOutcome run_single(const ExperimentConfig& c, const PreparedData& data, const std::string& model,
                      std::uint64_t seed);

/// In-process memo of run_single keyed by (run settings hash, seed, model).
void set_run_cache_enabled(bool enabled);
bool run_cache_enabled();
void clear_run_cache();
std::size_t run_cache_size();

struct Significance {
  std::string metric;
  std::string versus;
  double p_value = 1.0;
};

struct ReportRow {
  std::string label;  // variant name within the experiment, e.g. "raw" or "w=6"
  std::string model;
  std::vector<RunOutcome> runs;
  ClassMetrics aggregate;
  std::size_t windows_train = 0, windows_validate = 0, windows_test = 0;
  std::size_t feature_width = 0;
  std::size_t time_step = 0;
  int early_offset = 0;
  std::vector<Significance> significance;
  nlohmann::json extra = nlohmann::json::object();
};

struct SensitivityPoint {
  std::string series;
  double factor = 1.0;
  Month recession_start;
  std::optional<Month> predicted_onset;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;
  std::string config_hash;
  std::string window_hash;
  LossWeights weights;
  std::vector<ReportRow> rows;
  std::string best_row;  // sweep-w: label of the best-accuracy row
  // Test-split probability series: months, labels, and per-row seed means.
  std::vector<Month> test_months;
  std::vector<int> test_labels;
  std::vector<std::pair<std::string, std::vector<double>>> probabilities;
  std::vector<SensitivityPoint> sensitivity;
  double wall_clock_seconds = 0.0;  // written to timing.json only
};

struct RunOptions {
  std::size_t jobs = 1;
};

ExperimentReport run_main(const ExperimentConfig& c, const RunOptions& o = {});
ExperimentReport run_feature_ablation(const ExperimentConfig& c, const RunOptions& o = {});
ExperimentReport run_component_ablation(const ExperimentConfig& c, const RunOptions& o = {});
ExperimentReport run_timestep_sweep(const ExperimentConfig& c, const RunOptions& o = {});
ExperimentReport run_early_prediction(const ExperimentConfig& c, const RunOptions& o = {});
ExperimentReport run_sensitivity(const ExperimentConfig& c, const RunOptions& o = {});
/// Dispatches on c.experiment.
ExperimentReport run_experiment(const ExperimentConfig& c, const RunOptions& o = {});

/// Loss weights after optional validation tuning over the configured grid.
LossWeights resolve_loss_weights(const ExperimentConfig& c, const PreparedData& data);

/// First month in [start - 12, end) that begins a run of at least two
/// consecutive positive predictions.
std::optional<Month> predicted_onset(const std::vector<Prediction>& predictions, const RecessionSpan& span);

// Reports. emit_report writes report.json, table.csv and whichever of
// probabilities.csv, early_curve.csv, sensitivity.csv apply, plus
// checkpoints/ for the main model; wall-clock goes to timing.json so the
// other files are reproducible byte for byte.
nlohmann::json report_to_json(const ExperimentReport& r);
std::string table_csv(const ExperimentReport& r);
std::string probabilities_csv(const ExperimentReport& r);
std::string early_curve_csv(const ExperimentReport& r);
std::string sensitivity_csv(const ExperimentReport& r);
void emit_report(const ExperimentReport& r, const std::filesystem::path& out_dir);

}  // namespace cyclecast
