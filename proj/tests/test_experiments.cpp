#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cyclecast/experiments.hpp"
#include "test_support.hpp"

namespace cc = cyclecast;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cc::ExperimentConfig tiny_config() {
  auto c = cc::testing::canonical_config();
  c.epochs = 2;
  c.seeds = {0, 1};
  c.models = {"bilstm_aa", "logistic", "probit"};
  return c;
}

std::vector<cc::Prediction> labelled(cc::Month start, const std::vector<int>& labels) {
  std::vector<cc::Prediction> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.push_back({cc::add_months(start, static_cast<int>(i)), labels[i] ? 0.9 : 0.1, labels[i]});
  return out;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  auto c = cc::config_from_json(json::parse(R"({
    "experiment": "ablate-features", "epochs": 7, "seeds": [3, 4],
    "features": {"d2": false}, "components": {"attention": false},
    "alpha": 0.5, "beta": 0.001, "train_end": "1990-12", "val_end": "2002-12-01",
    "sensitivity": {"series": ["GS10"]}})"));
  EXPECT_EQ(c.experiment, "ablate-features");
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_TRUE(c.features.raw);
  EXPECT_FALSE(c.features.d2);
  EXPECT_FALSE(c.attention);
  EXPECT_TRUE(c.bidirectional);
  EXPECT_EQ(c.weights.alpha, 0.5);
  EXPECT_EQ(c.splits.val_end, cc::make_month(2002, 12));
  EXPECT_EQ(c.sensitivity.series, std::vector<std::string>{"GS10"});
  EXPECT_EQ(c.time_step, 6);
  EXPECT_EQ(c.models.size(), 8u);
}

TEST(Config, JsonRoundTripAndHash) {
  auto c = tiny_config();
  auto back = cc::config_from_json(cc::config_to_json(c));
  EXPECT_EQ(cc::config_to_json(back), cc::config_to_json(c));
  EXPECT_EQ(cc::config_hash(back), cc::config_hash(c));
  EXPECT_EQ(cc::config_hash(c).size(), 16u);
  back.epochs = 3;
  EXPECT_NE(cc::config_hash(back), cc::config_hash(c));
  EXPECT_EQ(cc::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(cc::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, Rejections) {
  auto bad = [](const char* text) { return cc::config_from_json(json::parse(text)); };
  EXPECT_ERROR_KIND(bad(R"({"epoch": 3})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"experiment": "everything"})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"epochs": "many"})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"seeds": []})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"features": {"raw": false, "d1": false, "d2": false}})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"features": {"d3": true}})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"train_end": "2005-01"})"), cc::ErrorKind::InvalidSplit);
  EXPECT_ERROR_KIND(bad(R"({"time_step": 0})"), cc::ErrorKind::WindowTooLong);
  EXPECT_ERROR_KIND(bad(R"({"early_offset": -1})"), cc::ErrorKind::InvalidSplit);
  EXPECT_ERROR_KIND(bad(R"({"threshold": 1.5})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"beta": -1})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"models": ["gbm"]})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"sensitivity": {"factors": [2.0]}})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(bad(R"({"start": "1959-01-15"})"), cc::ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(cc::load_config("/nonexistent/config.json"), cc::ErrorKind::MissingFile);
}

TEST(Config, CommittedConfigsParse) {
  for (const char* name : {"main.json", "smoke.json"})
    EXPECT_NO_THROW(cc::load_config(cc::testing::source_dir() / "configs" / name)) << name;
}

TEST(Prepare, CanonicalCountsAndHash) {
  const auto& d = cc::testing::canonical_data();
  EXPECT_EQ(d.train.size(), 389u);
  EXPECT_EQ(d.validate.size(), 144u);
  EXPECT_EQ(d.test.size(), 198u);
  EXPECT_EQ(d.window_hash.size(), 16u);
  EXPECT_EQ(cc::prepare_data(cc::testing::canonical_config(), cc::testing::canonical_panel()).window_hash, d.window_hash);
  auto c = cc::testing::canonical_config();
  c.standardize = false;
  auto raw = cc::prepare_data(c, cc::testing::canonical_panel());
  EXPECT_NE(raw.window_hash, d.window_hash);
  EXPECT_EQ(raw.test.front().at(0, 0), raw.features.at(raw.features.rows() - 198 - 5, 0));
}

TEST(Onset, FirstRunOfTwoPositives) {
  cc::RecessionSpan span{cc::make_month(2008, 1), cc::make_month(2009, 6)};
  auto start = cc::make_month(2006, 1);
  std::vector<int> labels(48, 0);
  EXPECT_FALSE(cc::predicted_onset(labelled(start, labels), span).has_value());
  labels[10] = 1;  // 2006-11: before the look-back and isolated
  labels[11] = 1;
  labels[15] = 1;  // 2007-04: isolated
  labels[20] = labels[21] = labels[22] = 1;  // 2007-09 onwards
  auto onset = cc::predicted_onset(labelled(start, labels), span);
  ASSERT_TRUE(onset.has_value());
  EXPECT_EQ(*onset, cc::make_month(2007, 9));
  std::vector<int> late(48, 0);
  late[45] = late[46] = 1;  // after the span ends
  EXPECT_FALSE(cc::predicted_onset(labelled(start, late), span).has_value());
}

TEST(Cache, ToggleAndReuse) {
  cc::clear_run_cache();
  cc::set_run_cache_enabled(true);
  auto c = tiny_config();
  const auto& d = cc::testing::canonical_data();
  auto a = cc::run_single(c, d, "probit", 0);
  EXPECT_EQ(cc::run_cache_size(), 1u);
  auto b = cc::run_single(c, d, "probit", 0);
  EXPECT_EQ(cc::run_cache_size(), 1u);
  EXPECT_EQ(a.metrics.recession.f1, b.metrics.recession.f1);
  cc::set_run_cache_enabled(false);
  cc::run_single(c, d, "probit", 1);
  EXPECT_EQ(cc::run_cache_size(), 1u);
  cc::set_run_cache_enabled(true);
  cc::clear_run_cache();
  EXPECT_EQ(cc::run_cache_size(), 0u);
  EXPECT_ERROR_KIND(cc::run_single(c, d, "gbm", 0), cc::ErrorKind::InvalidConfig);
}

TEST(Experiments, MainReportsAreReproducible) {
  auto c = tiny_config();
  cc::set_run_cache_enabled(false);
  auto dir_a = cc::testing::scratch_dir("exp_a"), dir_b = cc::testing::scratch_dir("exp_b");
  auto r1 = cc::run_experiment(c, {1});
  auto r2 = cc::run_experiment(c, {2});
  cc::set_run_cache_enabled(true);
  cc::emit_report(r1, dir_a);
  cc::emit_report(r2, dir_b);
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_a)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    auto rel = std::filesystem::relative(entry.path(), dir_a);
    EXPECT_EQ(slurp(entry.path()), slurp(dir_b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 6u);  // report, table, probabilities, 2 checkpoints, manifest
  EXPECT_TRUE(std::filesystem::exists(dir_a / "timing.json"));

  ASSERT_EQ(r1.rows.size(), 3u);
  for (const auto& row : r1.rows) {
    EXPECT_EQ(row.windows_test, 198u);
    EXPECT_EQ(row.runs.size(), 2u);
  }
  // Deterministic baselines have zero spread across seeds.
  EXPECT_EQ(r1.rows[1].aggregate.recession.f1.std, 0.0);
  EXPECT_EQ(r1.rows[2].aggregate.accuracy.std, 0.0);

  auto j = json::parse(slurp(dir_a / "report.json"));
  EXPECT_EQ(j["experiment"], "main");
  EXPECT_EQ(j["results"].size(), 3u);
  EXPECT_EQ(j["config_hash"], cc::config_hash(c));
  auto table = slurp(dir_a / "table.csv");
  EXPECT_NE(table.find("bilstm_aa"), std::string::npos);

  auto ckpt = cc::load_checkpoint(dir_a / "checkpoints" / "bilstm_aa_seed0.json");
  cc::ModelConfig mc;
  cc::ParameterSet params(mc);
  params.load_named(ckpt);
  auto preds = cc::predict(params, cc::testing::canonical_data().test);
  for (std::size_t i = 0; i < preds.size(); ++i)
    EXPECT_EQ(preds[i].label, r1.rows[0].runs[0].test_predictions[i].label);
}

TEST(Experiments, EarlyAtZeroMatchesMain) {
  auto c = tiny_config();
  c.models = {"bilstm_aa"};
  cc::set_run_cache_enabled(false);
  auto main = cc::run_main(c);
  c.experiment = "early";
  c.early_offsets = {0};
  auto early = cc::run_early_prediction(c);
  cc::set_run_cache_enabled(true);
  ASSERT_EQ(early.rows.size(), 1u);
  EXPECT_EQ(early.rows[0].label, "k=0");
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& a = main.rows[0].runs[s].metrics;
    const auto& b = early.rows[0].runs[s].metrics;
    EXPECT_EQ(a.recession.f1, b.recession.f1);
    EXPECT_EQ(a.recession.accuracy, b.recession.accuracy);
    EXPECT_EQ(a.expansion.precision, b.expansion.precision);
  }
}

TEST(Experiments, EarlyOffsetsShrinkTestSplit) {
  auto c = tiny_config();
  c.experiment = "early";
  c.models = {"bilstm_aa", "logistic"};
  c.early_offsets = {1, 3};
  c.early_table_offset = 3;
  c.epochs = 1;
  auto r = cc::run_experiment(c);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].label, "k=1");
  EXPECT_EQ(r.rows[0].windows_test, 197u);
  EXPECT_EQ(r.rows[2].windows_test, 195u);
  EXPECT_EQ(r.rows[2].model, "logistic");
  ASSERT_EQ(r.rows[1].significance.size(), 2u);  // main model vs best rival at the table offset
  EXPECT_EQ(r.rows[1].significance[0].versus, "logistic");
  auto curve = cc::early_curve_csv(r);
  EXPECT_NE(curve.find("k"), std::string::npos);
}

TEST(Experiments, AblationsAndSweep) {
  auto c = tiny_config();
  c.epochs = 1;
  c.seeds = {0};
  c.models = {"bilstm_aa"};
  c.experiment = "ablate-features";
  auto f = cc::run_experiment(c);
  std::vector<std::string> labels;
  for (const auto& row : f.rows) labels.push_back(row.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"raw", "d1", "d2", "d1+d2", "raw+d1+d2"}));
  EXPECT_EQ(f.rows[0].feature_width, 14u);
  EXPECT_EQ(f.rows[3].feature_width, 28u);

  c.experiment = "ablate-components";
  auto comp = cc::run_experiment(c);
  ASSERT_EQ(comp.rows.size(), 4u);
  EXPECT_EQ(comp.rows[3].label, "full");
  EXPECT_LT(comp.rows[1].extra["parameter_count"].get<std::size_t>(),
            comp.rows[3].extra["parameter_count"].get<std::size_t>());

  c.experiment = "sweep-w";
  c.timesteps = {3, 6};
  auto sw = cc::run_experiment(c);
  ASSERT_EQ(sw.rows.size(), 2u);
  EXPECT_EQ(sw.rows[0].label, "w=3");
  EXPECT_EQ(sw.rows[0].windows_train, 392u);
  EXPECT_FALSE(sw.best_row.empty());
}

TEST(Experiments, SensitivityFromCheckpoint) {
  auto c = tiny_config();
  c.epochs = 1;
  c.seeds = {0};
  c.models = {"bilstm_aa"};
  auto main = cc::run_main(c);
  auto dir = cc::testing::scratch_dir("sens");
  cc::emit_report(main, dir);
  c.experiment = "sensitivity";
  c.sensitivity.series = {"BAA"};
  c.sensitivity.factors = {0.7, 1.0};
  c.sensitivity.checkpoint = (dir / "checkpoints" / "bilstm_aa_seed0.json").string();
  auto r = cc::run_experiment(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].runs[0].metrics.recession.f1, main.rows[0].runs[0].metrics.recession.f1);
  // Two test-period recessions, two factors.
  EXPECT_EQ(r.sensitivity.size(), 4u);
  EXPECT_FALSE(cc::sensitivity_csv(r).empty());
  c.sensitivity.series = {"GDP"};
  EXPECT_ERROR_KIND(cc::run_experiment(c), cc::ErrorKind::UnknownSeries);
}
