/* morphkit C API.
 *
 * Opaque handles with explicit create/destroy pairs. Every fallible call
 * returns an mk_status; on failure mk_last_error() holds a message for the
 * calling thread. Strings passed in are copied; strings returned stay valid
 * until the owning handle is destroyed (or, for mk_last_error, until the next
 * call on the same thread). Buffer-returning calls write at most `capacity`
 * bytes (NUL-terminated) and always report the required size in `*needed`.
 */
#ifndef MORPHKIT_H
#define MORPHKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MORPHKIT_BUILDING)
#    define MK_API __declspec(dllexport)
#  else
#    define MK_API __declspec(dllimport)
#  endif
#else
#  define MK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mk_status {
  MK_OK = 0,
  MK_ERR_INVALID_ARGUMENT = 1,
  MK_ERR_IO = 2,
  MK_ERR_UNAVAILABLE = 3,
  MK_ERR_CONFIG = 4,
  MK_ERR_DEGENERATE = 5,
  MK_ERR_SHAPE = 6,
  MK_ERR_CACHE_MISS = 7,
  MK_ERR_BACKEND = 8,
  MK_ERR_INTERNAL = 9
} mk_status;

typedef struct mk_config mk_config;
typedef struct mk_backend mk_backend;
typedef struct mk_run mk_run;
typedef struct mk_eval_report mk_eval_report;

MK_API const char* mk_version(void);
MK_API const char* mk_status_name(mk_status status);
MK_API const char* mk_last_error(void);

/* ---- configuration ---------------------------------------------------- */

MK_API mk_status mk_config_create(mk_config** out);
MK_API void mk_config_destroy(mk_config* config);
/* Keys: frames, steps, lambda1..lambda4, cfg_scale, inversion_cfg_scale,
 * noise_cutoff, transform (fft|dct), noise_band (high|low), seed, slerp_eps,
 * conditioning (blend|left|right). Unknown keys are MK_ERR_CONFIG. */
MK_API mk_status mk_config_set(mk_config* config, const char* key, const char* value);
MK_API mk_status mk_config_get(const mk_config* config, const char* key, char* buffer,
                               size_t capacity, size_t* needed);
/* Flat key = value file, or a run manifest.txt (its config.* keys). */
MK_API mk_status mk_config_load_file(mk_config* config, const char* path);
/* MK_ERR_CONFIG listing every violated invariant. */
MK_API mk_status mk_config_validate(const mk_config* config);
MK_API mk_status mk_config_dump(const mk_config* config, char* buffer, size_t capacity,
                                size_t* needed);

/* ---- backends --------------------------------------------------------- */

/* name: "toy" or "pretrained". model_ref is ignored for the toy backend; for
 * the pretrained adapter NULL/"" means $MORPHKIT_MODEL_DIR. A missing model
 * yields MK_ERR_UNAVAILABLE with a remediation hint. */
MK_API mk_status mk_backend_open(const char* name, const char* model_ref, uint64_t seed,
                                 int steps, mk_backend** out);
MK_API void mk_backend_destroy(mk_backend* backend);
MK_API mk_status mk_backend_resolution(const mk_backend* backend, int* width, int* height);

/* ---- morphing --------------------------------------------------------- */

typedef int (*mk_caption_fn)(void* user, const char* which /* "left" | "right" */,
                             const char* image_path, char* buffer, size_t capacity);

typedef struct mk_morph_options {
  size_t struct_size; /* sizeof(mk_morph_options) */
  const char* left_path;
  const char* right_path;
  const char* prompt_left;  /* NULL: ask the caption callback */
  const char* prompt_right;
  int edit_mode;            /* same image on both sides, differing prompts */
  const char* variant;      /* NULL or "full" for the complete method */
  mk_caption_fn caption;    /* optional */
  void* caption_user;
} mk_morph_options;

MK_API void mk_morph_options_init(mk_morph_options* options);

MK_API mk_status mk_morph(mk_backend* backend, const mk_config* config,
                          const mk_morph_options* options, mk_run** out);
MK_API void mk_run_destroy(mk_run* run);

MK_API size_t mk_run_frame_count(const mk_run* run);
MK_API uint64_t mk_run_latent_checksum(const mk_run* run);
/* Final latent of frame `index` (0 = left endpoint). */
MK_API mk_status mk_run_frame_latent(const mk_run* run, size_t index, float* values,
                                     size_t capacity, size_t* needed);
/* Decoded frame as 8-bit RGB, row-major. */
MK_API mk_status mk_run_frame_rgb(const mk_run* run, size_t index, uint8_t* pixels,
                                  size_t capacity, int* width, int* height);
MK_API mk_status mk_run_manifest(const mk_run* run, char* buffer, size_t capacity,
                                 size_t* needed);
/* endpoints: 0 = reconstructed endpoint frames, 1 = resized input images. */
MK_API mk_status mk_run_write(const mk_run* run, const char* out_dir, int endpoints);

/* Space-separated list of ablation variant labels. */
MK_API const char* mk_variant_labels(void);

/* ---- evaluation ------------------------------------------------------- */

typedef struct mk_metrics_row {
  const char* pair_id;
  double lpips_sum;
  double ppl_sum;
  double fid_mean;
  int frame_count;
} mk_metrics_row;

/* extractor: "random_projection" or "identity". results_path may be NULL. */
MK_API mk_status mk_evaluate(const char* dataset_manifest, const char* runs_dir,
                             const char* extractor, const char* results_path,
                             mk_eval_report** out);
MK_API void mk_eval_report_destroy(mk_eval_report* report);
MK_API size_t mk_eval_report_row_count(const mk_eval_report* report);
MK_API mk_status mk_eval_report_row(const mk_eval_report* report, size_t index,
                                    mk_metrics_row* row);
MK_API mk_status mk_eval_report_aggregate(const mk_eval_report* report, mk_metrics_row* row);
MK_API size_t mk_eval_report_skipped_count(const mk_eval_report* report);
MK_API const char* mk_eval_report_skipped(const mk_eval_report* report, size_t index);

#ifdef __cplusplus
}
#endif

#endif /* MORPHKIT_H */
