#pragma once

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "cyclecast/error.hpp"
#include "cyclecast/experiments.hpp"

namespace cyclecast::testing {

inline std::filesystem::path source_dir() { return CYCLECAST_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CYCLECAST_FIXTURE_DIR) / name;
}

/// Config pointing at the committed canonical data regardless of cwd.
inline ExperimentConfig canonical_config() {
  ExperimentConfig c;
  c.data_dir = (source_dir() / "data/canonical").string();
  c.calendar = (source_dir() / "data/nber_recessions.csv").string();
  return c;
}

inline const MonthlyPanel& canonical_panel() {
  static const MonthlyPanel panel = load_panel(canonical_config());
  return panel;
}

inline const PreparedData& canonical_data() {
  static const PreparedData data = prepare_data(canonical_config(), canonical_panel());
  return data;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cyclecast_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cyclecast::testing

#define EXPECT_ERROR_KIND(stmt, expected)                                  \
  do {                                                                     \
    try {                                                                  \
      stmt;                                                                \
      ADD_FAILURE() << "expected " << ::cyclecast::to_string(expected);    \
    } catch (const ::cyclecast::Error& e) {                                \
      EXPECT_EQ(e.kind(), expected) << e.what();                           \
    }                                                                      \
  } while (0)
