#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cyclecast/autodiff.hpp"

namespace cyclecast {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// File layout:
//   {"format": "cyclecast-checkpoint", "version": 1,
//    "parameters": [{"name": ..., "shape": [rows, cols], "values": [...]}, ...]}
// Values are written as shortest round-trip decimals, so a save/load cycle is
// bit-exact.
std::string checkpoint_to_json(const std::vector<NamedTensor>& params);
std::vector<NamedTensor> checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace cyclecast
