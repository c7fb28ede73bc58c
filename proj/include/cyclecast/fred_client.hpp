#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclecast/ingest.hpp"

namespace cyclecast {

/// Parses a FRED `series/observations` JSON body. FRED's "." missing marker
/// is rejected as MalformedRow rather than imputed.
MonthlySeries parse_fred_observations(std::string_view json_text, std::string name);

struct FredClientOptions {
  std::string base_url = "https://api.stlouisfed.org";
  std::filesystem::path cache_dir = "cache";
  bool prefer_cache = false;  // serve from cache/<id>.json when present
  int timeout_seconds = 30;
};

/// Blocking client for the FRED observations endpoint. One request at a time.
class FredClient {
 public:
  explicit FredClient(FredClientOptions options = {});

  MonthlySeries fetch(const std::string& series_id, const std::string& api_key, Month start, Month end) const;

  std::filesystem::path cache_path(const std::string& series_id) const;

 private:
  FredClientOptions options_;
};

/// Fetches every canonical series FRED publishes into `dir` as <NAME>.csv and
/// derives T10Y3M from GS10 and TB3MS. ISM is not on FRED; it must already be
/// present in `dir`. Returns the files written.
std::vector<std::filesystem::path> fetch_series_dir(const FredClient& client, const std::string& api_key,
                                                    const std::filesystem::path& dir, Month start, Month end);

/// Reads FRED_API_KEY from the environment.
std::optional<std::string> fred_api_key_from_env();

}  // namespace cyclecast
