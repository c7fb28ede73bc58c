#include "cyclecast/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

using nlohmann::json;

std::string checkpoint_to_json(const std::vector<NamedTensor>& params) {
  json doc;
  doc["format"] = "cyclecast-checkpoint";
  doc["version"] = 1;
  json list = json::array();
  for (const auto& p : params) {
    list.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"values", p.value.storage()}});
  }
  doc["parameters"] = std::move(list);
  return doc.dump(1) + "\n";
}

std::vector<NamedTensor> checkpoint_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) fail(ErrorKind::IoError, "checkpoint is not valid JSON");
  if (doc.value("format", "") != "cyclecast-checkpoint") fail(ErrorKind::IoError, "not a cyclecast checkpoint");
  if (doc.value("version", 0) != 1) fail(ErrorKind::IoError, "unsupported checkpoint version");
  std::vector<NamedTensor> out;
  try {
    for (const auto& p : doc.at("parameters")) {
      auto shape = p.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) fail(ErrorKind::ShapeMismatch, "checkpoint shape must have two entries");
      auto values = p.at("values").get<std::vector<double>>();
      out.push_back({p.at("name").get<std::string>(), Tensor(shape[0], shape[1], std::move(values))});
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::IoError, std::string("malformed checkpoint: ") + e.what());
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << checkpoint_to_json(params);
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace cyclecast
