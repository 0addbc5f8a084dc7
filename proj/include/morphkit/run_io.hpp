#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morphkit/metrics.hpp"
#include "morphkit/pipeline.hpp"

namespace morphkit {

enum class EndpointFrames { reconstructed, original };

// Writes 000.png .. (J+1).png, contact_sheet.png, input_left.png,
// input_right.png and manifest.txt into dir (created if needed).
void write_run(const MorphResult& result, const std::string& dir,
               EndpointFrames endpoints = EndpointFrames::reconstructed);

struct LoadedRun {
  std::vector<Image> frames;
  std::vector<Image> inputs;  // input_left.png, input_right.png when present
  RunManifest manifest;
};

// Throws ErrorCode::io when frames are missing.
LoadedRun load_run(const std::string& dir);

struct EvaluationReport {
  std::vector<MetricsReport> rows;
  MetricsReport aggregate;
  std::vector<std::string> skipped;  // "pair_id: reason"
};

// Evaluates <runs_dir>/<pair_id>/ for every manifest entry. References are
// the run's input_left/right.png, falling back to the manifest paths. When
// results_path is non-empty one tab-separated row per pair plus an
// aggregate row is appended, keyed by the hash of each run manifest.
EvaluationReport evaluate_runs(const std::string& dataset_manifest_path,
                               const std::string& runs_dir, const std::string& extractor,
                               const std::string& results_path = "");

std::string format_report(const MetricsReport& row);

}  // namespace morphkit
