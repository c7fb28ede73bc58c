#pragma once

#include <cstdint>
#include <vector>

#include "cyclecast/ingest.hpp"

namespace cyclecast {

/// Synthetic stand-in for the 14 monthly indexes, driven by a recession
/// calendar. Series follow the stylized facts of the real data (trending
/// price levels, a yield curve that flattens ahead of downturns, coincident
/// output and capacity drops, lagging unemployment) so the full pipeline can
/// run where the source data is unavailable. Not a substitute for the real
/// series when judging forecasting skill.
struct SurrogateOptions {
  Month start = kCanonicalStart;
  Month end = kCanonicalEnd;
  std::uint64_t seed = 19590101;
};

std::vector<MonthlySeries> generate_surrogate_series(const RecessionCalendar& calendar,
                                                     const SurrogateOptions& options = {});

}  // namespace cyclecast
