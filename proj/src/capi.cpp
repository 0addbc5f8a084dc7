#include "morphkit/morphkit.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "morphkit/config.hpp"
#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/pipeline.hpp"
#include "morphkit/pretrained_adapter.hpp"
#include "morphkit/run_io.hpp"
#include "morphkit/toy_backend.hpp"

using namespace morphkit;

struct mk_config {
  MorphConfig cfg;
};

struct mk_backend {
  std::unique_ptr<Backend> impl;
};

struct mk_run {
  MorphResult result;
  std::string manifest_text;
};

struct mk_eval_report {
  EvaluationReport report;
};

namespace {

thread_local std::string t_last_error;

mk_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return MK_ERR_INVALID_ARGUMENT;
    case ErrorCode::config: return MK_ERR_CONFIG;
    case ErrorCode::degenerate_input: return MK_ERR_DEGENERATE;
    case ErrorCode::shape_mismatch: return MK_ERR_SHAPE;
    case ErrorCode::out_of_range: return MK_ERR_INVALID_ARGUMENT;
    case ErrorCode::cache_miss: return MK_ERR_CACHE_MISS;
    case ErrorCode::backend: return MK_ERR_BACKEND;
    case ErrorCode::unavailable: return MK_ERR_UNAVAILABLE;
    case ErrorCode::io: return MK_ERR_IO;
  }
  return MK_ERR_INTERNAL;
}

mk_status fail(mk_status s, const std::string& msg) {
  t_last_error = msg;
  return s;
}

template <class F>
mk_status guarded(F&& f) {
  try {
    t_last_error.clear();
    f();
    return MK_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MK_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MK_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

void copy_out(const std::string& s, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buffer && capacity > 0) {
    size_t n = std::min(capacity - 1, s.size());
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
  }
}

class CallbackCaptions : public CaptionProvider {
 public:
  CallbackCaptions(mk_caption_fn fn, void* user, std::string left, std::string right)
      : fn_(fn), user_(user), left_(std::move(left)), right_(std::move(right)) {}
  std::string name() const override { return "callback"; }
  std::string caption(const Image&, const std::string& label) override {
    std::string buf(1024, '\0');
    const std::string& path = label == "left" ? left_ : right_;
    if (fn_(user_, label.c_str(), path.c_str(), buf.data(), buf.size()) != 0)
      throw Error(ErrorCode::config, "caption callback failed for the " + label + " image");
    buf.resize(std::strlen(buf.c_str()));
    return buf;
  }

 private:
  mk_caption_fn fn_;
  void* user_;
  std::string left_;
  std::string right_;
};

}  // namespace

extern "C" {

const char* mk_version(void) { return "0.1.0"; }

const char* mk_status_name(mk_status status) {
  switch (status) {
    case MK_OK: return "ok";
    case MK_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MK_ERR_IO: return "io";
    case MK_ERR_UNAVAILABLE: return "unavailable";
    case MK_ERR_CONFIG: return "config";
    case MK_ERR_DEGENERATE: return "degenerate_input";
    case MK_ERR_SHAPE: return "shape_mismatch";
    case MK_ERR_CACHE_MISS: return "cache_miss";
    case MK_ERR_BACKEND: return "backend";
    case MK_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mk_last_error(void) { return t_last_error.c_str(); }

mk_status mk_config_create(mk_config** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new mk_config{};
  });
}

void mk_config_destroy(mk_config* config) { delete config; }

mk_status mk_config_set(mk_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    set_config_value(config->cfg, key, value);
  });
}

mk_status mk_config_get(const mk_config* config, const char* key, char* buffer, size_t capacity,
                        size_t* needed) {
  return guarded([&] {
    require(config && key, "null argument");
    copy_out(get_config_value(config->cfg, key), buffer, capacity, needed);
  });
}

mk_status mk_config_load_file(mk_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    config->cfg = load_config_file(path, config->cfg);
  });
}

mk_status mk_config_validate(const mk_config* config) {
  return guarded([&] {
    require(config, "config is null");
    validate_config(config->cfg);
  });
}

mk_status mk_config_dump(const mk_config* config, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(config, "config is null");
    copy_out(format_config(config->cfg), buffer, capacity, needed);
  });
}

mk_status mk_backend_open(const char* name, const char* model_ref, uint64_t seed, int steps,
                          mk_backend** out) {
  return guarded([&] {
    require(name && out, "null argument");
    *out = nullptr;
    const std::string n = name;
    auto b = std::make_unique<mk_backend>();
    if (n == "toy") {
      if (steps < 1) throw Error(ErrorCode::config, "steps must be >= 1");
      b->impl = std::make_unique<ToyBackend>(seed, steps);
    } else if (n == "pretrained") {
      b->impl = open_pretrained(model_ref ? model_ref : "", steps);
    } else {
      throw Error(ErrorCode::config, "unknown backend '" + n + "' (expected toy or pretrained)");
    }
    *out = b.release();
  });
}

void mk_backend_destroy(mk_backend* backend) { delete backend; }

mk_status mk_backend_resolution(const mk_backend* backend, int* width, int* height) {
  return guarded([&] {
    require(backend && width && height, "null argument");
    *width = backend->impl->image_width();
    *height = backend->impl->image_height();
  });
}

void mk_morph_options_init(mk_morph_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof *options);
  options->struct_size = sizeof *options;
}

mk_status mk_morph(mk_backend* backend, const mk_config* config, const mk_morph_options* options,
                   mk_run** out) {
  return guarded([&] {
    require(backend && config && options && out, "null argument");
    require(options->struct_size >= sizeof(mk_morph_options), "mk_morph_options not initialised");
    require(options->left_path != nullptr, "left image path missing");
    *out = nullptr;
    const bool edit = options->edit_mode != 0;
    const char* right_path = options->right_path ? options->right_path : (edit ? options->left_path : nullptr);
    require(right_path != nullptr, "right image path missing");

    const Backend& be = *backend->impl;
    MorphRequest req;
    req.config = validate_config(config->cfg);
    req.left_label = options->left_path;
    req.right_label = right_path;
    req.left_image = fit_to_resolution(load_png(options->left_path), be.image_width(), be.image_height());
    req.right_image = std::string(right_path) == options->left_path
                          ? req.left_image
                          : fit_to_resolution(load_png(right_path), be.image_width(), be.image_height());
    if (options->prompt_left) req.prompt_left = options->prompt_left;
    if (options->prompt_right) req.prompt_right = options->prompt_right;
    req.edit_mode = edit;

    std::unique_ptr<CallbackCaptions> captions;
    if (options->caption)
      captions = std::make_unique<CallbackCaptions>(options->caption, options->caption_user,
                                                    options->left_path, right_path);
    PipelineOptions po;
    po.ablation = Ablation::from_label(options->variant ? options->variant : "full");
    po.caption_provider = captions.get();

    auto run = std::make_unique<mk_run>();
    run->result = morph(req, be, po);
    run->manifest_text = run->result.manifest.to_text();
    *out = run.release();
  });
}

void mk_run_destroy(mk_run* run) { delete run; }

size_t mk_run_frame_count(const mk_run* run) { return run ? run->result.frames.size() : 0; }

uint64_t mk_run_latent_checksum(const mk_run* run) {
  return run ? run->result.latent_checksum() : 0;
}

mk_status mk_run_frame_latent(const mk_run* run, size_t index, float* values, size_t capacity,
                              size_t* needed) {
  return guarded([&] {
    require(run, "run is null");
    if (index >= run->result.final.member_count())
      throw Error(ErrorCode::out_of_range, "frame index " + std::to_string(index) + " out of range");
    auto v = run->result.final.frame(index).data.values();
    if (needed) *needed = v.size();
    if (values) std::memcpy(values, v.data(), std::min(capacity, v.size()) * sizeof(float));
  });
}

mk_status mk_run_frame_rgb(const mk_run* run, size_t index, uint8_t* pixels, size_t capacity,
                           int* width, int* height) {
  return guarded([&] {
    require(run, "run is null");
    if (index >= run->result.frames.size())
      throw Error(ErrorCode::out_of_range, "frame index " + std::to_string(index) + " out of range");
    const Image& img = run->result.frames[index];
    if (width) *width = img.width;
    if (height) *height = img.height;
    if (!pixels) return;
    if (capacity < img.rgb.size()) throw Error(ErrorCode::invalid_argument, "pixel buffer too small");
    for (size_t i = 0; i < img.rgb.size(); ++i) {
      float c = std::clamp(img.rgb[i], 0.0f, 1.0f);
      pixels[i] = static_cast<uint8_t>(std::lround(c * 255.0f));
    }
  });
}

mk_status mk_run_manifest(const mk_run* run, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(run, "run is null");
    copy_out(run->manifest_text, buffer, capacity, needed);
  });
}

mk_status mk_run_write(const mk_run* run, const char* out_dir, int endpoints) {
  return guarded([&] {
    require(run && out_dir, "null argument");
    write_run(run->result, out_dir, endpoints ? EndpointFrames::original : EndpointFrames::reconstructed);
  });
}

const char* mk_variant_labels(void) {
  static const std::string labels = [] {
    std::string s;
    for (const auto& l : Ablation::labels()) s += (s.empty() ? "" : " ") + l;
    return s;
  }();
  return labels.c_str();
}

mk_status mk_evaluate(const char* dataset_manifest, const char* runs_dir, const char* extractor,
                      const char* results_path, mk_eval_report** out) {
  return guarded([&] {
    require(dataset_manifest && runs_dir && out, "null argument");
    *out = nullptr;
    auto r = std::make_unique<mk_eval_report>();
    r->report = evaluate_runs(dataset_manifest, runs_dir, extractor ? extractor : "random_projection",
                              results_path ? results_path : "");
    *out = r.release();
  });
}

void mk_eval_report_destroy(mk_eval_report* report) { delete report; }

size_t mk_eval_report_row_count(const mk_eval_report* report) {
  return report ? report->report.rows.size() : 0;
}

static void fill_row(const MetricsReport& m, mk_metrics_row* row) {
  row->pair_id = m.pair_id.c_str();
  row->lpips_sum = m.lpips_sum;
  row->ppl_sum = m.ppl_sum;
  row->fid_mean = m.fid_mean;
  row->frame_count = m.frame_count;
}

mk_status mk_eval_report_row(const mk_eval_report* report, size_t index, mk_metrics_row* row) {
  return guarded([&] {
    require(report && row, "null argument");
    if (index >= report->report.rows.size()) throw Error(ErrorCode::out_of_range, "row index out of range");
    fill_row(report->report.rows[index], row);
  });
}

mk_status mk_eval_report_aggregate(const mk_eval_report* report, mk_metrics_row* row) {
  return guarded([&] {
    require(report && row, "null argument");
    fill_row(report->report.aggregate, row);
  });
}

size_t mk_eval_report_skipped_count(const mk_eval_report* report) {
  return report ? report->report.skipped.size() : 0;
}

const char* mk_eval_report_skipped(const mk_eval_report* report, size_t index) {
  if (!report || index >= report->report.skipped.size()) return nullptr;
  return report->report.skipped[index].c_str();
}

}  // extern "C"
