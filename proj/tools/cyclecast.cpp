#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cyclecast/error.hpp"
#include "cyclecast/experiments.hpp"
#include "cyclecast/fred_client.hpp"
#include "cyclecast/surrogate.hpp"

namespace cc = cyclecast;

namespace {

int report_error(std::string_view kind, const std::string& detail) {
  nlohmann::json rec{{"error", kind}, {"detail", detail}};
  std::cerr << rec.dump() << '\n';
  return 2;
}

cc::Month month_arg(const std::string& s) {
  cc::Month m;
  if (!cc::try_parse_month(s, m)) cc::fail(cc::ErrorKind::InvalidConfig, "bad month '" + s + "'");
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recession prediction from monthly macroeconomic series"};
  app.require_subcommand(1);

  // fetch
  std::string series_dir, cache_dir = "cache", base_url = "https://api.stlouisfed.org";
  std::string fetch_start = "1959-01", fetch_end = "2020-06";
  bool prefer_cache = false;
  auto* fetch = app.add_subcommand("fetch", "Download the FRED series into a directory (needs FRED_API_KEY)");
  fetch->add_option("--series-dir", series_dir, "Output directory for <NAME>.csv files")->required();
  fetch->add_option("--start", fetch_start, "First month, YYYY-MM");
  fetch->add_option("--end", fetch_end, "Last month, YYYY-MM");
  fetch->add_option("--cache-dir", cache_dir, "Where raw responses are kept");
  fetch->add_option("--base-url", base_url, "FRED API root");
  fetch->add_flag("--prefer-cache", prefer_cache, "Use cached responses when present");

  // synth
  std::string synth_out, synth_calendar;
  std::uint64_t synth_seed = cc::SurrogateOptions{}.seed;
  auto* synth = app.add_subcommand("synth", "Write the synthetic stand-in series and the recession calendar");
  synth->add_option("--out", synth_out, "Output directory for <NAME>.csv files")->required();
  synth->add_option("--calendar", synth_calendar, "Calendar CSV path (default <out>/../nber_recessions.csv)");
  synth->add_option("--seed", synth_seed, "Generator seed");

  // features
  std::string feat_config, feat_out;
  auto* features = app.add_subcommand("features", "Export the engineered feature panel as CSV");
  features->add_option("--config", feat_config, "Experiment config (data paths and range)")->required();
  features->add_option("--out", feat_out, "CSV path")->required();

  // run
  std::string kind, config_path, out_dir;
  std::size_t jobs = 1, bottleneck = 0;
  bool no_standardize = false, sigmoid_head = false, relu_gates = false;
  auto* run = app.add_subcommand("run", "Run an experiment and write its reports");
  run->add_option("experiment", kind, "main|ablate-features|ablate-components|sweep-w|early|sensitivity")
      ->required()
      ->check(CLI::IsMember({"main", "ablate-features", "ablate-components", "sweep-w", "early", "sensitivity"}));
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "Report directory")->required();
  run->add_option("--jobs", jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--no-standardize", no_standardize, "Feed unscaled features");
  run->add_flag("--sigmoid-head", sigmoid_head, "Sigmoid output instead of the rescaled tanh");
  run->add_option("--bottleneck", bottleneck, "Autoencoder bottleneck width")->check(CLI::PositiveNumber);
  run->add_flag("--lstm-relu-gates", relu_gates, "ReLU for the LSTM candidate and cell output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fetch) {
      cc::FredClientOptions opts;
      opts.base_url = base_url;
      opts.cache_dir = cache_dir;
      opts.prefer_cache = prefer_cache;
      auto key = cc::fred_api_key_from_env();
      if (!key && !prefer_cache) cc::fail(cc::ErrorKind::AuthError, "FRED_API_KEY is not set");
      auto files = cc::fetch_series_dir(cc::FredClient(opts), key.value_or(""), series_dir, month_arg(fetch_start),
                                        month_arg(fetch_end));
      for (const auto& f : files) std::cout << f.string() << '\n';
    } else if (*synth) {
      auto calendar = cc::RecessionCalendar::canonical();
      cc::SurrogateOptions opts;
      opts.seed = synth_seed;
      std::filesystem::create_directories(synth_out);
      for (const auto& s : cc::generate_surrogate_series(calendar, opts))
        cc::write_series_csv(std::filesystem::path(synth_out) / (s.name + ".csv"), s);
      std::filesystem::path cal = synth_calendar.empty()
                                      ? std::filesystem::path(synth_out).parent_path() / "nber_recessions.csv"
                                      : std::filesystem::path(synth_calendar);
      cc::write_calendar_csv(cal, calendar);
      std::cout << "wrote " << cc::kSeriesCount << " series to " << synth_out << " and " << cal.string() << '\n';
    } else if (*features) {
      auto cfg = cc::load_config(feat_config);
      cc::write_feature_panel_csv(feat_out, cc::build_feature_panel(cc::load_panel(cfg)));
    } else if (*run) {
      auto cfg = cc::load_config(config_path);
      cfg.experiment = kind;
      if (no_standardize) cfg.standardize = false;
      if (sigmoid_head) cfg.sigmoid_head = true;
      if (bottleneck > 0) cfg.bottleneck = bottleneck;
      if (relu_gates) cfg.lstm_relu_gates = true;
      cc::validate_config(cfg);
      auto report = cc::run_experiment(cfg, cc::RunOptions{jobs});
      cc::emit_report(report, out_dir);
      std::cout << cc::table_csv(report);
    }
  } catch (const cc::Error& e) {
    return report_error(cc::to_string(e.kind()), e.detail());
  } catch (const std::exception& e) {
    return report_error("Internal", e.what());
  }
  return 0;
}
