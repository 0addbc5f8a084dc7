// morphkit command line: morph, ablate, edit, eval.
// Talks to the library only through the C API.

#include <morphkit/morphkit.h>

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kFailure = 1, kIo = 2, kUnavailable = 3, kConfig = 4 };

int exit_for(mk_status s) {
  switch (s) {
    case MK_OK: return kOk;
    case MK_ERR_IO: return kIo;
    case MK_ERR_UNAVAILABLE: return kUnavailable;
    case MK_ERR_CONFIG:
    case MK_ERR_INVALID_ARGUMENT: return kConfig;
    default: return kFailure;
  }
}

struct Failure {
  int code;
};

void check(mk_status s, const char* what) {
  if (s == MK_OK) return;
  std::fprintf(stderr, "morphkit: %s failed (%s): %s\n", what, mk_status_name(s), mk_last_error());
  throw Failure{exit_for(s)};
}

// Prompt from the file name when none is given: "red_fox-2.png" -> "red fox 2".
int filename_caption(void*, const char*, const char* path, char* buffer, size_t capacity) {
  std::string stem = std::filesystem::path(path).stem().string();
  for (char& c : stem)
    if (c == '_' || c == '-' || c == '.') c = ' ';
  std::snprintf(buffer, capacity, "%s", stem.c_str());
  return 0;
}

struct MorphFlags {
  std::string left, right, image;
  std::optional<std::string> prompt_left, prompt_right;
  std::string backend = "toy";
  std::string model;
  std::string out = "morph_out";
  std::string config_file;
  std::string endpoints = "reconstructed";
  std::string variant;
  // config overrides, passed through verbatim so the library validates them
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* app, MorphFlags& f) {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"frames", "intermediate frame count J"},
      {"steps", "DDIM steps T"},
      {"seed", "noise seed"},
      {"lambda1", "forward: end of original-attention stage (fraction of T)"},
      {"lambda2", "forward: end of prior-driven stage"},
      {"lambda3", "reverse: end of step-oriented stage"},
      {"lambda4", "reverse: end of spherical-aggregation stage"},
      {"cfg-scale", "guidance scale while denoising"},
      {"inversion-cfg-scale", "guidance scale while inverting"},
      {"noise-cutoff", "spectral noise cutoff in (0, 1]"},
      {"noise-band", "high|low"},
      {"transform", "fft|dct"},
      {"conditioning", "blend|left|right"},
      {"slerp-eps", "slerp degeneracy threshold"}};
  for (const auto& [flag, help] : keys) {
    std::string key = flag;
    for (char& c : key)
      if (c == '-') c = '_';
    app->add_option_function<std::string>(
        "--" + flag, [&f, key](const std::string& v) { f.overrides[key] = v; }, help);
  }
  app->add_option("--config", f.config_file, "key=value file or a previous run's manifest.txt");
  app->add_option("--backend", f.backend, "toy|pretrained")->capture_default_str();
  app->add_option("--model", f.model, "pretrained model directory (default $MORPHKIT_MODEL_DIR)");
  app->add_option("--out", f.out, "output directory")->capture_default_str();
  app->add_option("--endpoints", f.endpoints, "reconstructed|original")->capture_default_str();
}

struct Handles {
  mk_config* cfg = nullptr;
  mk_backend* backend = nullptr;
  mk_run* run = nullptr;
  ~Handles() {
    mk_run_destroy(run);
    mk_backend_destroy(backend);
    mk_config_destroy(cfg);
  }
};

std::string config_value(const mk_config* cfg, const char* key) {
  char buf[64];
  size_t needed = 0;
  check(mk_config_get(cfg, key, buf, sizeof buf, &needed), "reading config");
  return buf;
}

int run_morph(const MorphFlags& f, const std::string& left, const std::string& right, bool edit,
              const std::string& out_dir) {
  Handles h;
  check(mk_config_create(&h.cfg), "config");
  if (!f.config_file.empty()) check(mk_config_load_file(h.cfg, f.config_file.c_str()), "loading --config");
  for (const auto& [k, v] : f.overrides) {
    std::string what = "--" + k;
    check(mk_config_set(h.cfg, k.c_str(), v.c_str()), what.c_str());
  }
  check(mk_config_validate(h.cfg), "config");
  if (f.endpoints != "reconstructed" && f.endpoints != "original") {
    std::fprintf(stderr, "morphkit: --endpoints must be reconstructed or original\n");
    return kConfig;
  }

  const int steps = std::stoi(config_value(h.cfg, "steps"));
  check(mk_backend_open(f.backend.c_str(), f.model.c_str(), 0, steps, &h.backend), "opening backend");

  mk_morph_options opt;
  mk_morph_options_init(&opt);
  opt.left_path = left.c_str();
  opt.right_path = right.c_str();
  opt.prompt_left = f.prompt_left ? f.prompt_left->c_str() : nullptr;
  opt.prompt_right = f.prompt_right ? f.prompt_right->c_str() : nullptr;
  opt.edit_mode = edit ? 1 : 0;
  opt.variant = f.variant.empty() ? nullptr : f.variant.c_str();
  opt.caption = filename_caption;
  check(mk_morph(h.backend, h.cfg, &opt, &h.run), "morph");
  check(mk_run_write(h.run, out_dir.c_str(), f.endpoints == "original" ? 1 : 0), "writing run");

  std::printf("wrote %zu frames to %s\n", mk_run_frame_count(h.run), out_dir.c_str());
  std::printf("latent checksum %016llx\n", static_cast<unsigned long long>(mk_run_latent_checksum(h.run)));
  return kOk;
}

int run_eval(const std::string& manifest, const std::string& runs, const std::string& extractor,
             const std::string& results) {
  mk_eval_report* report = nullptr;
  check(mk_evaluate(manifest.c_str(), runs.c_str(), extractor.c_str(),
                    results.empty() ? nullptr : results.c_str(), &report),
        "eval");
  const size_t rows = mk_eval_report_row_count(report);
  const size_t skipped = mk_eval_report_skipped_count(report);
  for (size_t i = 0; i < skipped; ++i) std::fprintf(stderr, "skipped %s\n", mk_eval_report_skipped(report, i));
  mk_metrics_row row;
  for (size_t i = 0; i < rows; ++i) {
    mk_eval_report_row(report, i, &row);
    std::printf("%-16s lpips_sum=%.6f ppl_sum=%.6f fid=%.6f frames=%d\n", row.pair_id, row.lpips_sum,
                row.ppl_sum, row.fid_mean, row.frame_count);
  }
  int code = kOk;
  if (rows == 0 && skipped == 0) {
    std::fprintf(stderr, "morphkit: dataset manifest has no entries\n");
    code = kConfig;
  } else if (rows == 0) {
    std::fprintf(stderr, "morphkit: every pair was skipped\n");
    code = kIo;
  } else {
    mk_eval_report_aggregate(report, &row);
    std::printf("aggregate        lpips_sum=%.6f ppl_sum=%.6f fid_mean=%.6f pairs=%zu extractor=%s\n",
                row.lpips_sum, row.ppl_sum, row.fid_mean, rows, extractor.c_str());
    std::printf("ppl_sum uses eps = 1/(frames - 1)\n");
  }
  mk_eval_report_destroy(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free image morphing with a diffusion backend"};
  app.require_subcommand(1);

  MorphFlags morph_f, ablate_f, edit_f;

  auto* morph = app.add_subcommand("morph", "morph between two images");
  morph->add_option("--left", morph_f.left, "left image (PNG)")->required();
  morph->add_option("--right", morph_f.right, "right image (PNG)")->required();
  morph->add_option("--prompt-left", morph_f.prompt_left, "left prompt (default: from file name)");
  morph->add_option("--prompt-right", morph_f.prompt_right, "right prompt");
  add_config_flags(morph, morph_f);

  auto* ablate = app.add_subcommand("ablate", "morph with one component switched off");
  ablate->add_option("--left", ablate_f.left, "left image (PNG)")->required();
  ablate->add_option("--right", ablate_f.right, "right image (PNG)")->required();
  ablate->add_option("--prompt-left", ablate_f.prompt_left, "left prompt");
  ablate->add_option("--prompt-right", ablate_f.prompt_right, "right prompt");
  ablate->add_option("--variant", ablate_f.variant, std::string("one of: ") + mk_variant_labels());
  add_config_flags(ablate, ablate_f);

  auto* edit = app.add_subcommand("edit", "text-guided edit: same image on both sides");
  edit->add_option("--image", edit_f.image, "input image (PNG)")->required();
  edit->add_option("--prompt-from", edit_f.prompt_left, "prompt describing the input")->required();
  edit->add_option("--prompt-to", edit_f.prompt_right, "target prompt")->required();
  add_config_flags(edit, edit_f);

  std::string manifest, runs, extractor = "random_projection", results;
  auto* eval = app.add_subcommand("eval", "sequence metrics over a dataset of runs");
  eval->add_option("--manifest", manifest, "dataset manifest (JSON)")->required();
  eval->add_option("--runs", runs, "directory holding <pair_id>/ run folders")->required();
  eval->add_option("--extractor", extractor, "random_projection|identity")->capture_default_str();
  eval->add_option("--results", results, "append tab-separated rows to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*morph) return run_morph(morph_f, morph_f.left, morph_f.right, false, morph_f.out);
    if (*ablate) {
      const std::string label = ablate_f.variant.empty() ? "full" : ablate_f.variant;
      ablate_f.variant = label;
      return run_morph(ablate_f, ablate_f.left, ablate_f.right, false, ablate_f.out + "_" + label);
    }
    if (*edit) {
      // identical prompts: nothing to edit, run as a plain same-image morph
      const bool differ = *edit_f.prompt_left != *edit_f.prompt_right;
      return run_morph(edit_f, edit_f.image, edit_f.image, differ, edit_f.out);
    }
    if (*eval) return run_eval(manifest, runs, extractor, results);
  } catch (const Failure& f) {
    return f.code;
  }
  return kFailure;
}
