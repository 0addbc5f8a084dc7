#include "morphkit/run_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "morphkit/dataset.hpp"
#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/random.hpp"

namespace morphkit {
namespace fs = std::filesystem;

namespace {

std::string frame_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu.png", i);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_run(const MorphResult& result, const std::string& dir, EndpointFrames endpoints) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir + "': " + ec.message());
  if (result.frames.size() < 2) throw Error(ErrorCode::invalid_argument, "run has no frames");

  std::vector<Image> frames = result.frames;
  if (endpoints == EndpointFrames::original) {
    frames.front() = result.left_input;
    frames.back() = result.right_input;
  }
  for (std::size_t i = 0; i < frames.size(); ++i)
    save_png(frames[i], (fs::path(dir) / frame_name(i)).string());
  save_png(contact_sheet(frames), (fs::path(dir) / "contact_sheet.png").string());
  save_png(result.left_input, (fs::path(dir) / "input_left.png").string());
  save_png(result.right_input, (fs::path(dir) / "input_right.png").string());

  RunManifest m = result.manifest;
  m.set("output.endpoints", endpoints == EndpointFrames::original ? "original" : "reconstructed");
  std::ofstream out(fs::path(dir) / "manifest.txt");
  out << m.to_text();
  if (!out) throw Error(ErrorCode::io, "cannot write manifest in '" + dir + "'");
}

LoadedRun load_run(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "run directory '" + dir + "' not found");
  LoadedRun run;
  for (std::size_t i = 0;; ++i) {
    fs::path p = fs::path(dir) / frame_name(i);
    if (!fs::exists(p)) break;
    run.frames.push_back(load_png(p.string()));
  }
  if (run.frames.size() < 2)
    throw Error(ErrorCode::io, "run directory '" + dir + "' holds fewer than two frames");
  fs::path left = fs::path(dir) / "input_left.png";
  fs::path right = fs::path(dir) / "input_right.png";
  if (fs::exists(left) && fs::exists(right)) {
    run.inputs.push_back(load_png(left.string()));
    run.inputs.push_back(load_png(right.string()));
  }
  fs::path manifest = fs::path(dir) / "manifest.txt";
  if (fs::exists(manifest)) run.manifest = RunManifest::parse(read_text(manifest));
  return run;
}

std::string format_report(const MetricsReport& row) {
  std::ostringstream os;
  os << std::left << std::setw(16) << row.pair_id << std::right << std::fixed << std::setprecision(4)
     << "  lpips_sum=" << row.lpips_sum << "  ppl_sum=" << row.ppl_sum << "  fid=" << row.fid_mean
     << "  frames=" << row.frame_count << "  (" << row.extractor << ")";
  return os.str();
}

EvaluationReport evaluate_runs(const std::string& dataset_manifest_path, const std::string& runs_dir,
                               const std::string& extractor, const std::string& results_path) {
  DatasetManifest dataset = load_dataset_manifest(dataset_manifest_path);
  EvaluationReport report;
  std::vector<std::string> hashes;
  std::vector<std::string> classes;

  for (const auto& entry : dataset.entries) {
    fs::path dir = fs::path(runs_dir) / entry.pair_id;
    if (!fs::is_directory(dir)) {
      report.skipped.push_back(entry.pair_id + ": no run directory");
      continue;
    }
    try {
      LoadedRun run = load_run(dir.string());
      const int w = run.frames.front().width;
      const int h = run.frames.front().height;
      std::vector<Image> refs = run.inputs;
      if (refs.size() != 2) {
        refs = {fit_to_resolution(load_png(entry.left_path), w, h),
                fit_to_resolution(load_png(entry.right_path), w, h)};
      }
      auto ex = make_extractor(extractor, w, h);
      MetricsReport row = evaluate_sequence(run.frames, refs, *ex);
      row.pair_id = entry.pair_id;
      report.rows.push_back(row);
      hashes.push_back(hex(fnv1a(run.manifest.to_text())));
      classes.push_back(to_string(entry.pair_class));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::io && e.code() != ErrorCode::shape_mismatch) throw;
      report.skipped.push_back(entry.pair_id + ": " + e.what());
    }
  }
  report.aggregate = aggregate(report.rows);
  if (report.aggregate.extractor.empty()) report.aggregate.extractor = extractor;

  if (!results_path.empty()) {
    const bool fresh = !fs::exists(results_path);
    std::ofstream out(results_path, std::ios::app);
    if (!out) throw Error(ErrorCode::io, "cannot open results file '" + results_path + "'");
    out << std::setprecision(10);
    if (fresh) out << "manifest_hash\tpair_id\tclass\tframes\textractor\tlpips_sum\tppl_sum\tfid\n";
    std::uint64_t combined = fnv1a("aggregate");
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& r = report.rows[i];
      out << hashes[i] << '\t' << r.pair_id << '\t' << classes[i] << '\t' << r.frame_count << '\t'
          << r.extractor << '\t' << r.lpips_sum << '\t' << r.ppl_sum << '\t' << r.fid_mean << '\n';
      combined = fnv1a(hashes[i], combined);
    }
    const auto& a = report.aggregate;
    out << hex(combined) << "\taggregate\t-\t" << a.frame_count << '\t' << a.extractor << '\t'
        << a.lpips_sum << '\t' << a.ppl_sum << '\t' << a.fid_mean << '\n';
    if (!out) throw Error(ErrorCode::io, "cannot write results file '" + results_path + "'");
  }
  return report;
}

}  // namespace morphkit
