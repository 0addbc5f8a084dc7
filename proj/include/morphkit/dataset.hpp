#pragma once

#include <optional>
#include <string>
#include <vector>

namespace morphkit {

// Pair categories: A similar layout / different semantics, B similar in
// both, C similar in neither, D similar semantics / different layout.
enum class PairClass { A, B, C, D };

struct DatasetEntry {
  std::string pair_id;
  std::string left_path;
  std::string right_path;
  PairClass pair_class = PairClass::A;
  std::optional<std::string> prompt_left;
  std::optional<std::string> prompt_right;
};

struct DatasetManifest {
  std::string version = "1";
  std::vector<DatasetEntry> entries;
};

// JSON: {"version": "1", "entries": [{"pair_id", "left_path", "right_path",
// "class": "A".."D", "prompt_left"?, "prompt_right"?}, ...]}.
// Relative image paths are resolved against the manifest's directory.
DatasetManifest parse_dataset_manifest(const std::string& json_text,
                                       const std::string& base_dir = "");
DatasetManifest load_dataset_manifest(const std::string& path);
std::string dataset_manifest_to_json(const DatasetManifest& manifest);

const char* to_string(PairClass c);

}  // namespace morphkit
