#include "cyclecast/fred_client.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

MonthlySeries parse_fred_observations(std::string_view json_text, std::string name) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) fail(ErrorKind::MalformedRow, name + " response is not JSON");
  if (!doc.contains("observations") || !doc["observations"].is_array() || doc["observations"].empty())
    fail(ErrorKind::EmptyResponse, name);
  MonthlySeries series;
  series.name = std::move(name);
  if (int idx = canonical_series_index(series.name); idx >= 0)
    series.unit = std::string(kCanonicalSeries[static_cast<std::size_t>(idx)].unit);
  std::size_t row = 0;
  for (const auto& obs : doc["observations"]) {
    ++row;
    std::string tag = series.name + " observation " + std::to_string(row);
    if (!obs.contains("date") || !obs.contains("value") || !obs["date"].is_string() || !obs["value"].is_string())
      fail(ErrorKind::MalformedRow, tag);
    Month m;
    if (!try_parse_month(obs["date"].get<std::string>(), m)) fail(ErrorKind::MalformedRow, tag);
    std::string cell = obs["value"].get<std::string>();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
      fail(ErrorKind::MalformedRow, tag + " value '" + cell + "'");
    series.observations.push_back({m, value});
  }
  validate_series(series);
  return series;
}

FredClient::FredClient(FredClientOptions options) : options_(std::move(options)) {}

std::filesystem::path FredClient::cache_path(const std::string& series_id) const {
  return options_.cache_dir / (series_id + ".json");
}

MonthlySeries FredClient::fetch(const std::string& series_id, const std::string& api_key, Month start,
                                Month end) const {
  if (end < start) fail(ErrorKind::EmptyResponse, series_id + " end before start");
  auto cached = cache_path(series_id);
  if (options_.prefer_cache && std::filesystem::exists(cached)) {
    std::ifstream in(cached, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fred_observations(ss.str(), series_id);
  }
  if (api_key.empty()) fail(ErrorKind::AuthError, "empty api key");

  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  httplib::Params params{
      {"series_id", series_id},
      {"api_key", api_key},
      {"file_type", "json"},
      {"frequency", "m"},
      {"observation_start", format_fred_date(start)},
      {"observation_end", format_fred_date(end)},
  };
  auto res = client.Get("/fred/series/observations", params, httplib::Headers{});
  if (!res) fail(ErrorKind::HttpError, series_id + " transport: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) fail(ErrorKind::AuthError, series_id);
  if (res->status == 400 && res->body.find("api_key") != std::string::npos) fail(ErrorKind::AuthError, series_id);
  if (res->status != 200) fail(ErrorKind::HttpError, series_id + " status " + std::to_string(res->status));

  std::error_code ec;
  std::filesystem::create_directories(options_.cache_dir, ec);
  {
    std::ofstream out(cached, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, cached.string());
    out << res->body;
  }
  return parse_fred_observations(res->body, series_id);
}

std::vector<std::filesystem::path> fetch_series_dir(const FredClient& client, const std::string& api_key,
                                                    const std::filesystem::path& dir, Month start, Month end) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  MonthlySeries gs10, tb3ms;
  for (const auto& info : kCanonicalSeries) {
    const std::string name(info.name);
    if (name == "T10Y3M" || name == "ISM") continue;
    MonthlySeries s = client.fetch(name, api_key, start, end);
    auto path = dir / (name + ".csv");
    write_series_csv(path, s);
    written.push_back(path);
    if (name == "GS10") gs10 = s;
    if (name == "TB3MS") tb3ms = s;
  }
  auto path = dir / "T10Y3M.csv";
  write_series_csv(path, compute_term_spread(gs10, tb3ms));
  written.push_back(path);
  if (!std::filesystem::exists(dir / "ISM.csv"))
    fail(ErrorKind::SeriesMissing, "ISM is not published on FRED; place ISM.csv in " + dir.string());
  return written;
}

std::optional<std::string> fred_api_key_from_env() {
  const char* key = std::getenv("FRED_API_KEY");
  if (key == nullptr || *key == '\0') return std::nullopt;
  return std::string(key);
}

}  // namespace cyclecast
