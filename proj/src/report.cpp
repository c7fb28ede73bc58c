#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cyclecast/error.hpp"
#include "cyclecast/experiments.hpp"

namespace cyclecast {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}


json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

std::string pct(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f%%", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

json metrics_json(const Metrics& m) {
  return {{"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
}

json row_json(const ReportRow& row) {
  json j;
  j["row"] = row.label;
  j["model"] = row.model;
  j["config_hash"] = row.extra.value("config_hash", "");
  j["windows"] = {{"train", row.windows_train}, {"validate", row.windows_validate}, {"test", row.windows_test}};
  j["feature_width"] = row.feature_width;
  j["time_step"] = row.time_step;
  j["early_offset"] = row.early_offset;
  json runs = json::array();
  for (const auto& r : row.runs) {
    json rj;
    rj["seed"] = r.seed;
    rj["accuracy"] = r.metrics.recession.accuracy;
    rj["recession"] = metrics_json(r.metrics.recession);
    rj["expansion"] = metrics_json(r.metrics.expansion);
    rj["best_epoch"] = r.best_epoch;
    rj["parameter_count"] = r.parameter_count;
    if (r.model == kMainModel) {
      rj["val_f1"] = r.val_f1;
      rj["loss_at_best_epoch"] = {{"prediction", r.final_loss.prediction},
                                  {"reconstruction", r.final_loss.reconstruction},
                                  {"regularization", r.final_loss.regularization},
                                  {"total", r.final_loss.total}};
    } else if (r.hyperparameter != 0.0) {
      rj["hyperparameter"] = r.hyperparameter;
    }
    runs.push_back(std::move(rj));
  }
  j["per_run"] = std::move(runs);
  const ClassMetrics& a = row.aggregate;
  j["aggregate"] = {
      {"runs", a.runs},
      {"accuracy", mean_std_json(a.accuracy)},
      {"recession",
       {{"recall", mean_std_json(a.recession.recall)},
        {"precision", mean_std_json(a.recession.precision)},
        {"f1", mean_std_json(a.recession.f1)}}},
      {"expansion",
       {{"recall", mean_std_json(a.expansion.recall)},
        {"precision", mean_std_json(a.expansion.precision)},
        {"f1", mean_std_json(a.expansion.f1)}}},
      {"display",
       {{"accuracy", pct(a.accuracy)},
        {"recession_recall", pct(a.recession.recall)},
        {"recession_precision", pct(a.recession.precision)},
        {"recession_f1", pct(a.recession.f1)},
        {"expansion_recall", pct(a.expansion.recall)},
        {"expansion_precision", pct(a.expansion.precision)},
        {"expansion_f1", pct(a.expansion.f1)}}},
  };
  json sig = json::object();
  for (const auto& s : row.significance) sig[s.metric] = {{"versus", s.versus}, {"p_value", s.p_value}};
  j["significance"] = std::move(sig);
  json extra = row.extra;
  extra.erase("config_hash");
  j["extra"] = std::move(extra);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

json report_to_json(const ExperimentReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["config_hash"] = r.config_hash;
  j["config"] = r.config;
  j["window_hash"] = r.window_hash;
  j["loss_weights"] = {{"alpha", r.weights.alpha}, {"beta", r.weights.beta}};
  j["conventions"] = {{"std", "population standard deviation over seeds"},
                      {"significance", "two-sided Welch t-test over per-seed values against the strongest other model"},
                      {"undefined_ratios", "0/0 reported as 0"}};
  json results = json::array();
  for (const auto& row : r.rows) results.push_back(row_json(row));
  j["results"] = std::move(results);
  if (!r.best_row.empty()) j["best_row"] = r.best_row;
  if (!r.probabilities.empty()) {
    json months = json::array();
    for (Month m : r.test_months) months.push_back(format_month(m));
    json series = json::object();
    for (const auto& [name, values] : r.probabilities) series[name] = values;
    j["test_probabilities"] = {{"months", months}, {"labels", r.test_labels}, {"series", series}};
  }
  if (!r.sensitivity.empty()) {
    json s = json::array();
    for (const auto& p : r.sensitivity) {
      json pj = {{"series", p.series}, {"factor", p.factor}, {"recession_start", format_month(p.recession_start)}};
      if (p.predicted_onset) {
        pj["predicted_onset"] = format_month(*p.predicted_onset);
        pj["lead_months"] = months_between(*p.predicted_onset, p.recession_start);
      } else {
        pj["predicted_onset"] = nullptr;
        pj["lead_months"] = nullptr;
      }
      s.push_back(std::move(pj));
    }
    j["sensitivity"] = std::move(s);
  }
  return j;
}

std::string table_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "row,model,runs,accuracy,accuracy_std,recession_recall,recession_recall_std,recession_precision,"
         "recession_precision_std,recession_f1,recession_f1_std,expansion_recall,expansion_recall_std,"
         "expansion_precision,expansion_precision_std,expansion_f1,expansion_f1_std\n";
  for (const auto& row : r.rows) {
    const ClassMetrics& a = row.aggregate;
    out << row.label << ',' << row.model << ',' << a.runs;
    for (const MeanStd* m : {&a.accuracy, &a.recession.recall, &a.recession.precision, &a.recession.f1,
                             &a.expansion.recall, &a.expansion.precision, &a.expansion.f1})
      out << ',' << fmt(m->mean) << ',' << fmt(m->std);
    out << '\n';
  }
  return out.str();
}

std::string probabilities_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "month,label";
  for (const auto& [name, values] : r.probabilities) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < r.test_months.size(); ++i) {
    out << format_month(r.test_months[i]) << ',' << (i < r.test_labels.size() ? r.test_labels[i] : 0);
    for (const auto& [name, values] : r.probabilities) out << ',' << fmt(values[i]);
    out << '\n';
  }
  return out.str();
}

std::string early_curve_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "k,model,runs,accuracy,accuracy_std,recession_recall,recession_precision,recession_f1,recession_f1_std,"
         "test_windows\n";
  for (const auto& row : r.rows) {
    const ClassMetrics& a = row.aggregate;
    out << row.early_offset << ',' << row.model << ',' << a.runs << ',' << fmt(a.accuracy.mean) << ','
        << fmt(a.accuracy.std) << ',' << fmt(a.recession.recall.mean) << ',' << fmt(a.recession.precision.mean) << ','
        << fmt(a.recession.f1.mean) << ',' << fmt(a.recession.f1.std) << ',' << row.windows_test << '\n';
  }
  return out.str();
}

std::string sensitivity_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "series,factor,recession_start,predicted_onset,lead_months\n";
  for (const auto& p : r.sensitivity) {
    out << p.series << ',' << fmt(p.factor) << ',' << format_month(p.recession_start) << ',';
    if (p.predicted_onset)
      out << format_month(*p.predicted_onset) << ',' << months_between(*p.predicted_onset, p.recession_start);
    else
      out << ',';
    out << '\n';
  }
  return out.str();
}

void emit_report(const ExperimentReport& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "report.json", report_to_json(r).dump(2) + "\n");
  write_file(out_dir / "table.csv", table_csv(r));
  if (!r.probabilities.empty()) write_file(out_dir / "probabilities.csv", probabilities_csv(r));
  if (r.experiment == "early") write_file(out_dir / "early_curve.csv", early_curve_csv(r));
  if (r.experiment == "sensitivity") write_file(out_dir / "sensitivity.csv", sensitivity_csv(r));
  if (r.experiment == "main") {
    json manifest = json::array();
    for (const auto& row : r.rows) {
      if (row.model != kMainModel) continue;
      for (const auto& run : row.runs) {
        if (run.checkpoint.empty()) continue;
        const std::string file = "checkpoints/" + row.model + "_seed" + std::to_string(run.seed) + ".json";
        save_checkpoint(out_dir / file, run.checkpoint);
        manifest.push_back({{"seed", run.seed},
                            {"checkpoint", file},
                            {"config_hash", r.config_hash},
                            {"best_epoch", run.best_epoch},
                            {"accuracy", run.metrics.recession.accuracy},
                            {"recession_f1", run.metrics.recession.f1}});
      }
    }
    if (!manifest.empty()) write_file(out_dir / "checkpoints" / "manifest.json", manifest.dump(2) + "\n");
  }
  json timing = {{"experiment", r.experiment}, {"wall_clock_seconds", r.wall_clock_seconds}};
  write_file(out_dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace cyclecast
