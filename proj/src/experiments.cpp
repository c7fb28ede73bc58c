#include "cyclecast/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "cyclecast/error.hpp"
#include "cyclecast/fred_client.hpp"

namespace cyclecast {

using nlohmann::json;

namespace {

const std::set<std::string> kExperimentKinds{"main", "ablate-features", "ablate-components", "sweep-w", "early",
                                             "sensitivity"};

Month month_field(const json& j, const char* key) {
  if (!j.is_string()) fail(ErrorKind::InvalidConfig, std::string(key) + " must be a YYYY-MM string");
  Month m;
  if (!try_parse_month(j.get<std::string>(), m))
    fail(ErrorKind::InvalidConfig, std::string(key) + ": bad month '" + j.get<std::string>() + "'");
  return m;
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(ErrorKind::InvalidConfig, "unknown field '" + it.key() + "' in " + where);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> top{
      "experiment", "data_dir",    "calendar",   "fetch",          "start",         "end",
      "train_end",  "val_end",     "time_step",  "early_offset",   "features",      "components",
      "alpha",      "beta",        "tune_loss_weights", "alpha_grid", "beta_grid", "epochs",
      "learning_rate", "threshold", "seeds",     "standardize",    "sigmoid_head",  "bottleneck",
      "lstm_relu_gates", "models", "early_offsets", "early_table_offset", "timesteps", "sensitivity"};
  check_keys(j, top, "config");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "experiment") c.experiment = get_field<std::string>(v, "experiment");
    else if (k == "data_dir") c.data_dir = get_field<std::string>(v, "data_dir");
    else if (k == "calendar") c.calendar = get_field<std::string>(v, "calendar");
    else if (k == "fetch") c.fetch = get_field<bool>(v, "fetch");
    else if (k == "start") c.start = month_field(v, "start");
    else if (k == "end") c.end = month_field(v, "end");
    else if (k == "train_end") c.splits.train_end = month_field(v, "train_end");
    else if (k == "val_end") c.splits.val_end = month_field(v, "val_end");
    else if (k == "time_step") c.time_step = get_field<int>(v, "time_step");
    else if (k == "early_offset") c.early_offset = get_field<int>(v, "early_offset");
    else if (k == "features") {
      check_keys(v, {"raw", "d1", "d2"}, "features");
      c.features.raw = get_field<bool>(v.value("raw", json(true)), "features.raw");
      c.features.d1 = get_field<bool>(v.value("d1", json(true)), "features.d1");
      c.features.d2 = get_field<bool>(v.value("d2", json(true)), "features.d2");
    } else if (k == "components") {
      check_keys(v, {"attention", "bidirectional", "autoencoder"}, "components");
      c.attention = get_field<bool>(v.value("attention", json(true)), "components.attention");
      c.bidirectional = get_field<bool>(v.value("bidirectional", json(true)), "components.bidirectional");
      c.autoencoder = get_field<bool>(v.value("autoencoder", json(true)), "components.autoencoder");
    } else if (k == "alpha") c.weights.alpha = get_field<double>(v, "alpha");
    else if (k == "beta") c.weights.beta = get_field<double>(v, "beta");
    else if (k == "tune_loss_weights") c.tune_loss_weights = get_field<bool>(v, "tune_loss_weights");
    else if (k == "alpha_grid") c.alpha_grid = get_field<std::vector<double>>(v, "alpha_grid");
    else if (k == "beta_grid") c.beta_grid = get_field<std::vector<double>>(v, "beta_grid");
    else if (k == "epochs") c.epochs = get_field<std::size_t>(v, "epochs");
    else if (k == "learning_rate") c.learning_rate = get_field<double>(v, "learning_rate");
    else if (k == "threshold") c.threshold = get_field<double>(v, "threshold");
    else if (k == "seeds") c.seeds = get_field<std::vector<std::uint64_t>>(v, "seeds");
    else if (k == "standardize") c.standardize = get_field<bool>(v, "standardize");
    else if (k == "sigmoid_head") c.sigmoid_head = get_field<bool>(v, "sigmoid_head");
    else if (k == "bottleneck") c.bottleneck = get_field<std::size_t>(v, "bottleneck");
    else if (k == "lstm_relu_gates") c.lstm_relu_gates = get_field<bool>(v, "lstm_relu_gates");
    else if (k == "models") c.models = get_field<std::vector<std::string>>(v, "models");
    else if (k == "early_offsets") c.early_offsets = get_field<std::vector<int>>(v, "early_offsets");
    else if (k == "early_table_offset") c.early_table_offset = get_field<int>(v, "early_table_offset");
    else if (k == "timesteps") c.timesteps = get_field<std::vector<int>>(v, "timesteps");
    else if (k == "sensitivity") {
      check_keys(v, {"series", "factors", "checkpoint"}, "sensitivity");
      if (v.contains("series")) c.sensitivity.series = get_field<std::vector<std::string>>(v["series"], "series");
      if (v.contains("factors")) c.sensitivity.factors = get_field<std::vector<double>>(v["factors"], "factors");
      if (v.contains("checkpoint")) c.sensitivity.checkpoint = get_field<std::string>(v["checkpoint"], "checkpoint");
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::InvalidConfig, path.string() + " is not valid JSON");
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["data_dir"] = c.data_dir;
  j["calendar"] = c.calendar;
  j["fetch"] = c.fetch;
  j["start"] = format_month(c.start);
  j["end"] = format_month(c.end);
  j["train_end"] = format_month(c.splits.train_end);
  j["val_end"] = format_month(c.splits.val_end);
  j["time_step"] = c.time_step;
  j["early_offset"] = c.early_offset;
  j["features"] = {{"raw", c.features.raw}, {"d1", c.features.d1}, {"d2", c.features.d2}};
  j["components"] = {{"attention", c.attention}, {"bidirectional", c.bidirectional}, {"autoencoder", c.autoencoder}};
  j["alpha"] = c.weights.alpha;
  j["beta"] = c.weights.beta;
  j["tune_loss_weights"] = c.tune_loss_weights;
  j["alpha_grid"] = c.alpha_grid;
  j["beta_grid"] = c.beta_grid;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["threshold"] = c.threshold;
  j["seeds"] = c.seeds;
  j["standardize"] = c.standardize;
  j["sigmoid_head"] = c.sigmoid_head;
  j["bottleneck"] = c.bottleneck;
  j["lstm_relu_gates"] = c.lstm_relu_gates;
  j["models"] = c.models;
  j["early_offsets"] = c.early_offsets;
  j["early_table_offset"] = c.early_table_offset;
  j["timesteps"] = c.timesteps;
  j["sensitivity"] = {{"series", c.sensitivity.series},
                      {"factors", c.sensitivity.factors},
                      {"checkpoint", c.sensitivity.checkpoint}};
  return j;
}

void validate_config(const ExperimentConfig& c) {
  if (!kExperimentKinds.count(c.experiment)) fail(ErrorKind::InvalidConfig, "unknown experiment '" + c.experiment + "'");
  if (c.seeds.empty()) fail(ErrorKind::InvalidConfig, "seeds must not be empty");
  if (!c.features.any()) fail(ErrorKind::InvalidConfig, "feature mask is empty");
  if (!(c.splits.train_end < c.splits.val_end)) fail(ErrorKind::InvalidSplit, "train_end must precede val_end");
  if (!(c.start < c.end)) fail(ErrorKind::InvalidConfig, "start must precede end");
  if (c.time_step < 1) fail(ErrorKind::WindowTooLong, "time_step must be at least 1");
  if (c.early_offset < 0) fail(ErrorKind::InvalidSplit, "early_offset must be non-negative");
  if (c.epochs < 1) fail(ErrorKind::InvalidConfig, "epochs must be at least 1");
  if (!(c.learning_rate > 0.0)) fail(ErrorKind::InvalidConfig, "learning_rate must be positive");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) fail(ErrorKind::InvalidConfig, "threshold must be in (0, 1)");
  if (c.bottleneck < 1) fail(ErrorKind::InvalidConfig, "bottleneck must be at least 1");
  if (!(c.weights.alpha >= 0.0) || !(c.weights.beta >= 0.0))
    fail(ErrorKind::InvalidConfig, "alpha and beta must be non-negative");
  if (c.tune_loss_weights && (c.alpha_grid.empty() || c.beta_grid.empty()))
    fail(ErrorKind::InvalidConfig, "tuning grids must not be empty");
  for (double a : c.alpha_grid)
    if (!(a >= 0.0)) fail(ErrorKind::InvalidConfig, "alpha_grid entries must be non-negative");
  for (double b : c.beta_grid)
    if (!(b >= 0.0)) fail(ErrorKind::InvalidConfig, "beta_grid entries must be non-negative");
  if (c.models.empty()) fail(ErrorKind::InvalidConfig, "models must not be empty");
  for (const auto& m : c.models)
    if (m != kMainModel) parse_baseline(m);
  for (int k : c.early_offsets)
    if (k < 0) fail(ErrorKind::InvalidSplit, "early offsets must be non-negative");
  for (int w : c.timesteps)
    if (w < 1) fail(ErrorKind::WindowTooLong, "timesteps must be at least 1");
  for (double f : c.sensitivity.factors)
    if (!(f >= 0.5 && f <= 1.5)) fail(ErrorKind::InvalidConfig, "sensitivity factors must lie in [0.5, 1.5]");
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(config_to_json(c).dump())); }

std::string window_hash(const std::vector<LabeledWindow>& windows) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) { h = fnv1a64(std::string_view(static_cast<const char*>(p), n), h); };
  for (const auto& w : windows) {
    const int idx = month_index(w.end_month);
    const int split = static_cast<int>(w.split);
    mix(&idx, sizeof idx);
    mix(&w.label, sizeof w.label);
    mix(&split, sizeof split);
    mix(&w.steps, sizeof w.steps);
    mix(&w.width, sizeof w.width);
    mix(w.block.data(), w.block.size() * sizeof(double));
  }
  return hex64(h);
}

namespace {

RecessionCalendar load_calendar(const ExperimentConfig& c) {
  if (c.calendar.empty()) return RecessionCalendar::canonical();
  return load_calendar_csv(c.calendar);
}

}  // namespace

MonthlyPanel load_panel(const ExperimentConfig& c) {
  if (c.fetch) {
    auto key = fred_api_key_from_env();
    if (!key) fail(ErrorKind::AuthError, "fetch requested but FRED_API_KEY is not set");
    FredClient client;
    fetch_series_dir(client, *key, c.data_dir, c.start, c.end);
  }
  auto series = load_series_dir(c.data_dir);
  return build_panel(series, load_calendar(c), c.start, c.end);
}

PreparedData prepare_data(const ExperimentConfig& c, const MonthlyPanel& panel) {
  PreparedData d;
  d.panel = panel;
  d.features = build_feature_panel(panel);
  d.standardizer = c.standardize ? fit_standardizer(d.features, c.splits.train_end)
                                 : Standardizer::identity(d.features.cols());
  WindowOptions opts{c.time_step, c.early_offset, c.splits, c.features};
  auto windows = build_windows(d.features, d.standardizer, opts);
  d.window_hash = window_hash(windows);
  d.train = select_split(windows, Split::Train);
  d.validate = select_split(windows, Split::Validate);
  d.test = select_split(windows, Split::Test);
  return d;
}

// ---- single runs and the run cache ----

namespace {

struct RunCache {
  std::mutex mu;
  bool enabled = true;
  std::map<std::string, RunOutcome> entries;
};

RunCache& cache() {
  static RunCache c;
  return c;
}

std::string run_key(const ExperimentConfig& c, const PreparedData& d, const std::string& model, std::uint64_t seed) {
  json k;
  k["windows"] = d.window_hash;
  k["model"] = model;
  k["seed"] = seed;
  k["epochs"] = c.epochs;
  k["learning_rate"] = c.learning_rate;
  k["threshold"] = c.threshold;
  if (model == kMainModel) {
    k["components"] = {c.attention, c.bidirectional, c.autoencoder};
    k["bottleneck"] = c.bottleneck;
    k["sigmoid_head"] = c.sigmoid_head;
    k["lstm_relu_gates"] = c.lstm_relu_gates;
    k["alpha"] = c.weights.alpha;
    k["beta"] = c.weights.beta;
  }
  return hex64(fnv1a64(k.dump())) + ":" + model + ":" + std::to_string(seed);
}

TrainConfig train_config(const ExperimentConfig& c, std::uint64_t seed) {
  TrainConfig t;
  t.model.use_attention = c.attention;
  t.model.use_backward = c.bidirectional;
  t.model.use_autoencoder = c.autoencoder;
  t.model.bottleneck = c.bottleneck;
  t.model.sigmoid_head = c.sigmoid_head;
  t.model.lstm_relu_gates = c.lstm_relu_gates;
  t.epochs = c.epochs;
  t.learning_rate = c.learning_rate;
  t.seed = seed;
  t.weights = c.weights;
  t.threshold = c.threshold;
  return t;
}

RunOutcome compute_run(const ExperimentConfig& c, const PreparedData& d, const std::string& model,
                       std::uint64_t seed) {
  RunOutcome out;
  out.model = model;
  out.seed = seed;
  if (model == kMainModel) {
    TrainResult r = train(d.train, train_config(c, seed), d.validate);
    out.test_predictions = predict(r.params, d.test, c.threshold);
    out.val_f1 = r.best_val_f1;
    out.best_epoch = r.best_epoch;
    out.parameter_count = r.params.count();
    if (r.best_epoch < r.history.size()) out.final_loss = r.history[r.best_epoch].loss;
    out.checkpoint = r.params.to_named();
  } else {
    BaselineConfig bc;
    bc.epochs = c.epochs;
    bc.learning_rate = c.learning_rate;
    bc.seed = seed;
    bc.threshold = c.threshold;
    BaselineModel m = train_baseline(parse_baseline(model), d.train, d.validate, bc);
    out.test_predictions = predict_baseline(m, d.test, c.threshold);
    out.best_epoch = m.best_epoch;
    out.hyperparameter = m.hyperparameter;
    out.parameter_count = m.parameter_count();
  }
  std::vector<int> predicted, actual;
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    predicted.push_back(out.test_predictions[i].label);
    actual.push_back(d.test[i].label);
  }
  out.metrics = evaluate(predicted, actual);
  return out;
}

}  // namespace

void set_run_cache_enabled(bool enabled) {
  std::lock_guard lock(cache().mu);
  cache().enabled = enabled;
}

bool run_cache_enabled() {
  std::lock_guard lock(cache().mu);
  return cache().enabled;
}

void clear_run_cache() {
  std::lock_guard lock(cache().mu);
  cache().entries.clear();
}

std::size_t run_cache_size() {
  std::lock_guard lock(cache().mu);
  return cache().entries.size();
}

RunOutcome run_single(const ExperimentConfig& c, const PreparedData& data, const std::string& model,
                      std::uint64_t seed) {
  const std::string key = run_key(c, data, model, seed);
  {
    std::lock_guard lock(cache().mu);
    if (cache().enabled)
      if (auto it = cache().entries.find(key); it != cache().entries.end()) return it->second;
  }
  RunOutcome out = compute_run(c, data, model, seed);
  std::lock_guard lock(cache().mu);
  if (cache().enabled) cache().entries.emplace(key, out);
  return out;
}

// ---- experiment drivers ----

namespace {

struct Task {
  std::string model;
  std::uint64_t seed;
};

// Runs every (model, seed) task on up to `jobs` threads. Results land in task
// order regardless of completion order; the first failure by task index is
// rethrown.
std::vector<RunOutcome> run_tasks(const ExperimentConfig& c, const PreparedData& d, const std::vector<Task>& tasks,
                                  std::size_t jobs) {
  std::vector<RunOutcome> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_single(c, d, tasks[i].model, tasks[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

ReportRow make_row(const std::string& label, const std::string& model, std::vector<RunOutcome> runs,
                   const ExperimentConfig& c, const PreparedData& d) {
  ReportRow row;
  row.label = label;
  row.model = model;
  std::vector<RunMetrics> m;
  for (const auto& r : runs) m.push_back(r.metrics);
  row.aggregate = aggregate_runs(m);
  row.runs = std::move(runs);
  row.windows_train = d.train.size();
  row.windows_validate = d.validate.size();
  row.windows_test = d.test.size();
  row.feature_width = d.train.empty() ? 0 : d.train.front().width;
  row.time_step = static_cast<std::size_t>(c.time_step);
  row.early_offset = c.early_offset;
  row.extra["config_hash"] = config_hash(c);
  return row;
}

// Trains `models` over every seed and appends one row per model.
void add_rows(std::vector<ReportRow>& rows, const std::string& label, const std::vector<std::string>& models,
              const ExperimentConfig& c, const PreparedData& d, const RunOptions& o) {
  std::vector<Task> tasks;
  for (const auto& m : models)
    for (auto s : c.seeds) tasks.push_back({m, s});
  auto results = run_tasks(c, d, tasks, o.jobs);
  std::size_t i = 0;
  for (const auto& m : models) {
    std::vector<RunOutcome> runs(results.begin() + static_cast<std::ptrdiff_t>(i),
                                 results.begin() + static_cast<std::ptrdiff_t>(i + c.seeds.size()));
    i += c.seeds.size();
    rows.push_back(make_row(label, m, std::move(runs), c, d));
  }
}

std::vector<double> per_run(const ReportRow& row, double (*pick)(const RunMetrics&)) {
  std::vector<double> v;
  for (const auto& r : row.runs) v.push_back(pick(r.metrics));
  return v;
}

double pick_f1(const RunMetrics& m) { return m.recession.f1; }
double pick_accuracy(const RunMetrics& m) { return m.recession.accuracy; }

// Compares the main model's row against the strongest other row (by mean
// recession F1) among `candidates`.
void annotate_significance(std::vector<ReportRow>& rows, std::size_t first, std::size_t last) {
  std::optional<std::size_t> main_idx, rival;
  for (std::size_t i = first; i < last; ++i) {
    if (rows[i].model == kMainModel && !main_idx) {
      main_idx = i;
    } else if (!rival || rows[i].aggregate.recession.f1.mean > rows[*rival].aggregate.recession.f1.mean) {
      rival = i;
    }
  }
  if (!main_idx || !rival) return;
  for (auto [name, pick] : {std::pair{"recession_f1", &pick_f1}, std::pair{"accuracy", &pick_accuracy}}) {
    try {
      double p = welch_t_test(per_run(rows[*main_idx], pick), per_run(rows[*rival], pick));
      rows[*main_idx].significance.push_back({name, rows[*rival].model, p});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientRuns) throw;
    }
  }
}

void attach_probabilities(ExperimentReport& report) {
  if (report.rows.empty()) return;
  const auto& first = report.rows.front().runs.front().test_predictions;
  for (const auto& p : first) report.test_months.push_back(p.month);
  for (const auto& row : report.rows) {
    const auto& preds = row.runs.front().test_predictions;
    bool same = preds.size() == report.test_months.size();
    for (std::size_t i = 0; same && i < preds.size(); ++i) same = preds[i].month == report.test_months[i];
    if (!same) continue;
    std::vector<double> mean(preds.size(), 0.0);
    for (const auto& r : row.runs)
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.test_predictions[i].probability;
    for (double& v : mean) v /= static_cast<double>(row.runs.size());
    const std::string name = row.label == "main" ? row.model : row.label + "/" + row.model;
    report.probabilities.emplace_back(name, std::move(mean));
  }
}

ExperimentReport new_report(const ExperimentConfig& c, const std::string& experiment) {
  ExperimentReport r;
  r.experiment = experiment;
  ExperimentConfig echo = c;
  echo.experiment = experiment;
  r.config = config_to_json(echo);
  r.config_hash = config_hash(echo);
  return r;
}

void fill_test_labels(ExperimentReport& r, const PreparedData& d) {
  r.test_labels.clear();
  for (const auto& w : d.test) r.test_labels.push_back(w.label);
}

}  // namespace

LossWeights resolve_loss_weights(const ExperimentConfig& c, const PreparedData& data) {
  if (!c.tune_loss_weights) return c.weights;
  // The configured pair is scored first and only a strictly better
  // validation F1 replaces it.
  std::vector<LossWeights> grid{c.weights};
  for (double a : c.alpha_grid)
    for (double b : c.beta_grid)
      if (a != c.weights.alpha || b != c.weights.beta) grid.push_back({a, b});
  LossWeights best = c.weights;
  double best_f1 = -1.0;
  for (const auto& w : grid) {
    ExperimentConfig trial = c;
    trial.weights = w;
    RunOutcome r = run_single(trial, data, std::string(kMainModel), c.seeds.front());
    if (r.val_f1 > best_f1) {
      best_f1 = r.val_f1;
      best = w;
    }
  }
  return best;
}

ExperimentReport run_main(const ExperimentConfig& c, const RunOptions& o) {
  ExperimentReport report = new_report(c, "main");
  const PreparedData d = prepare_data(c, load_panel(c));
  ExperimentConfig eff = c;
  eff.weights = resolve_loss_weights(c, d);
  report.weights = eff.weights;
  report.window_hash = d.window_hash;
  add_rows(report.rows, "main", c.models, eff, d, o);
  annotate_significance(report.rows, 0, report.rows.size());
  fill_test_labels(report, d);
  attach_probabilities(report);
  return report;
}

ExperimentReport run_feature_ablation(const ExperimentConfig& c, const RunOptions& o) {
  ExperimentReport report = new_report(c, "ablate-features");
  const MonthlyPanel panel = load_panel(c);
  const PreparedData base = prepare_data(c, panel);
  ExperimentConfig eff = c;
  eff.weights = resolve_loss_weights(c, base);
  report.weights = eff.weights;
  report.window_hash = base.window_hash;
  const std::vector<FeatureMask> masks{
      {true, false, false}, {false, true, false}, {false, false, true}, {false, true, true}, {true, true, true}};
  for (const auto& mask : masks) {
    ExperimentConfig v = eff;
    v.features = mask;
    const PreparedData d = prepare_data(v, panel);
    add_rows(report.rows, mask.label(), {std::string(kMainModel)}, v, d, o);
    if (report.test_labels.empty()) fill_test_labels(report, d);
  }
  attach_probabilities(report);
  return report;
}

ExperimentReport run_component_ablation(const ExperimentConfig& c, const RunOptions& o) {
  ExperimentReport report = new_report(c, "ablate-components");
  const PreparedData d = prepare_data(c, load_panel(c));
  ExperimentConfig eff = c;
  eff.weights = resolve_loss_weights(c, d);
  report.weights = eff.weights;
  report.window_hash = d.window_hash;
  struct Variant {
    const char* label;
    bool attention, bidirectional, autoencoder;
  };
  for (const Variant& v : {Variant{"no_attention", false, true, true}, Variant{"unidirectional", true, false, true},
                           Variant{"no_autoencoder", true, true, false}, Variant{"full", true, true, true}}) {
    ExperimentConfig vc = eff;
    vc.attention = v.attention;
    vc.bidirectional = v.bidirectional;
    vc.autoencoder = v.autoencoder;
    add_rows(report.rows, v.label, {std::string(kMainModel)}, vc, d, o);
    ReportRow& row = report.rows.back();
    double rec = 0.0;
    for (const auto& r : row.runs) rec += r.final_loss.reconstruction;
    row.extra["parameter_count"] = row.runs.front().parameter_count;
    row.extra["reconstruction_loss_mean"] = rec / static_cast<double>(row.runs.size());
  }
  fill_test_labels(report, d);
  attach_probabilities(report);
  return report;
}

ExperimentReport run_timestep_sweep(const ExperimentConfig& c, const RunOptions& o) {
  ExperimentReport report = new_report(c, "sweep-w");
  const MonthlyPanel panel = load_panel(c);
  const PreparedData base = prepare_data(c, panel);
  ExperimentConfig eff = c;
  eff.weights = resolve_loss_weights(c, base);
  report.weights = eff.weights;
  report.window_hash = base.window_hash;
  double best_acc = -1.0;
  for (int w : c.timesteps) {
    ExperimentConfig v = eff;
    v.time_step = w;
    const PreparedData d = prepare_data(v, panel);
    add_rows(report.rows, "w=" + std::to_string(w), {std::string(kMainModel)}, v, d, o);
    ReportRow& row = report.rows.back();
    row.extra["windows_total"] = d.train.size() + d.validate.size() + d.test.size();
    if (row.aggregate.accuracy.mean > best_acc) {
      best_acc = row.aggregate.accuracy.mean;
      report.best_row = row.label;
    }
    if (report.test_labels.empty()) fill_test_labels(report, d);
  }
  attach_probabilities(report);
  return report;
}

ExperimentReport run_early_prediction(const ExperimentConfig& c, const RunOptions& o) {
  ExperimentReport report = new_report(c, "early");
  const MonthlyPanel panel = load_panel(c);
  const PreparedData base = prepare_data(c, panel);
  ExperimentConfig eff = c;
  eff.weights = resolve_loss_weights(c, base);
  report.weights = eff.weights;
  report.window_hash = base.window_hash;
  for (int k : c.early_offsets) {
    ExperimentConfig v = eff;
    v.early_offset = k;
    const PreparedData d = prepare_data(v, panel);
    const std::size_t first = report.rows.size();
    std::vector<std::string> models{std::string(kMainModel)};
    if (k == c.early_table_offset) models = c.models;
    add_rows(report.rows, "k=" + std::to_string(k), models, v, d, o);
    for (std::size_t i = first; i < report.rows.size(); ++i)
      report.rows[i].extra["windows_total"] = d.train.size() + d.validate.size() + d.test.size();
    if (models.size() > 1) annotate_significance(report.rows, first, report.rows.size());
  }
  return report;
}

std::optional<Month> predicted_onset(const std::vector<Prediction>& predictions, const RecessionSpan& span) {
  const Month from = add_months(span.start, -12);
  for (std::size_t i = 0; i + 1 < predictions.size(); ++i) {
    const Month m = predictions[i].month;
    if (m < from || !(m < span.end)) continue;
    if (predictions[i].label == 1 && predictions[i + 1].label == 1 &&
        predictions[i + 1].month == add_months(m, 1))
      return m;
  }
  return std::nullopt;
}

ExperimentReport run_sensitivity(const ExperimentConfig& c, const RunOptions& o) {
  (void)o;
  for (const auto& s : c.sensitivity.series)
    if (canonical_series_index(s) < 0) fail(ErrorKind::UnknownSeries, s);
  ExperimentReport report = new_report(c, "sensitivity");
  const MonthlyPanel panel = load_panel(c);
  const PreparedData d = prepare_data(c, panel);
  ExperimentConfig eff = c;
  report.window_hash = d.window_hash;

  ModelConfig mc = train_config(c, c.seeds.front()).model;
  mc.input = d.test.empty() ? c.features.width() : d.test.front().width;
  ParameterSet params(mc);
  RunOutcome base_run;
  if (!c.sensitivity.checkpoint.empty()) {
    report.weights = c.weights;
    params.load_named(load_checkpoint(c.sensitivity.checkpoint));
    base_run.model = std::string(kMainModel);
    base_run.seed = c.seeds.front();
    base_run.test_predictions = predict(params, d.test, c.threshold);
    std::vector<int> predicted, actual;
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      predicted.push_back(base_run.test_predictions[i].label);
      actual.push_back(d.test[i].label);
    }
    base_run.metrics = evaluate(predicted, actual);
    base_run.parameter_count = params.count();
  } else {
    eff.weights = resolve_loss_weights(c, d);
    report.weights = eff.weights;
    base_run = run_single(eff, d, std::string(kMainModel), c.seeds.front());
    params.load_named(base_run.checkpoint);
  }
  ExperimentConfig row_cfg = eff;
  row_cfg.seeds = {c.seeds.front()};
  report.rows.push_back(make_row("unperturbed", std::string(kMainModel), {base_run}, row_cfg, d));
  report.rows.back().extra["checkpoint"] = c.sensitivity.checkpoint.empty() ? "trained" : c.sensitivity.checkpoint;

  std::vector<RecessionSpan> test_spans;
  const RecessionCalendar calendar = load_calendar(c);
  for (const auto& span : calendar.spans())
    if (c.splits.val_end < span.start && !(c.end < span.start)) test_spans.push_back(span);

  WindowOptions opts{c.time_step, c.early_offset, c.splits, c.features};
  for (const auto& series : c.sensitivity.series) {
    for (double factor : c.sensitivity.factors) {
      MonthlyPanel perturbed = perturb_series(panel, series, factor);
      FeaturePanel fp = build_feature_panel(perturbed);
      auto test = select_split(build_windows(fp, d.standardizer, opts), Split::Test);
      auto preds = predict(params, test, c.threshold);
      for (const auto& span : test_spans) report.sensitivity.push_back({series, factor, span.start, predicted_onset(preds, span)});
    }
  }
  fill_test_labels(report, d);
  attach_probabilities(report);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& c, const RunOptions& o) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r;
  if (c.experiment == "main") r = run_main(c, o);
  else if (c.experiment == "ablate-features") r = run_feature_ablation(c, o);
  else if (c.experiment == "ablate-components") r = run_component_ablation(c, o);
  else if (c.experiment == "sweep-w") r = run_timestep_sweep(c, o);
  else if (c.experiment == "early") r = run_early_prediction(c, o);
  else r = run_sensitivity(c, o);
  r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace cyclecast
