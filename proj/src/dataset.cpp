#include "morphkit/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morphkit/error.hpp"

namespace morphkit {
namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(PairClass c) {
  switch (c) {
    case PairClass::A: return "A";
    case PairClass::B: return "B";
    case PairClass::C: return "C";
    case PairClass::D: return "D";
  }
  return "?";
}

namespace {

PairClass parse_class(const std::string& s, const std::string& pair_id) {
  if (s == "A") return PairClass::A;
  if (s == "B") return PairClass::B;
  if (s == "C") return PairClass::C;
  if (s == "D") return PairClass::D;
  throw Error(ErrorCode::config, "entry '" + pair_id + "': class must be A, B, C or D, got '" + s + "'");
}

std::string required_string(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw Error(ErrorCode::config, where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

std::string resolve(const std::string& path, const std::string& base) {
  if (base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

DatasetManifest parse_dataset_manifest(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, std::string("dataset manifest is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::config, "dataset manifest must be a JSON object");

  DatasetManifest m;
  if (auto v = root.find("version"); v != root.end()) {
    if (v->is_string()) m.version = v->get<std::string>();
    else if (v->is_number_integer()) m.version = std::to_string(v->get<long long>());
    else throw Error(ErrorCode::config, "dataset manifest: version must be a string");
  }
  auto entries = root.find("entries");
  if (entries == root.end() || !entries->is_array())
    throw Error(ErrorCode::config, "dataset manifest: missing 'entries' array");

  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& e : *entries) {
    std::string where = "entries[" + std::to_string(index++) + "]";
    if (!e.is_object()) throw Error(ErrorCode::config, where + " is not an object");
    DatasetEntry d;
    d.pair_id = required_string(e, "pair_id", where);
    if (d.pair_id.empty() || d.pair_id.find('/') != std::string::npos || d.pair_id == "." ||
        d.pair_id == "..")
      throw Error(ErrorCode::config, where + ": pair_id must be a plain directory name");
    if (!seen.insert(d.pair_id).second)
      throw Error(ErrorCode::config, "duplicate pair_id '" + d.pair_id + "'");
    d.left_path = resolve(required_string(e, "left_path", where), base_dir);
    d.right_path = resolve(required_string(e, "right_path", where), base_dir);
    d.pair_class = parse_class(required_string(e, "class", where), d.pair_id);
    if (e.contains("prompt_left")) d.prompt_left = required_string(e, "prompt_left", where);
    if (e.contains("prompt_right")) d.prompt_right = required_string(e, "prompt_right", where);
    m.entries.push_back(std::move(d));
  }
  return m;
}

DatasetManifest load_dataset_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open dataset manifest '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dataset_manifest(ss.str(), fs::path(path).parent_path().string());
  } catch (Error& e) {
    throw e.with_context(path);
  }
}

std::string dataset_manifest_to_json(const DatasetManifest& manifest) {
  json root;
  root["version"] = manifest.version;
  root["entries"] = json::array();
  for (const auto& d : manifest.entries) {
    json e{{"pair_id", d.pair_id},
           {"left_path", d.left_path},
           {"right_path", d.right_path},
           {"class", to_string(d.pair_class)}};
    if (d.prompt_left) e["prompt_left"] = *d.prompt_left;
    if (d.prompt_right) e["prompt_right"] = *d.prompt_right;
    root["entries"].push_back(std::move(e));
  }
  return root.dump(2);
}

}  // namespace morphkit
