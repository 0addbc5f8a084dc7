#include "morphkit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "morphkit/error.hpp"
#include "morphkit/freq_noise.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/random.hpp"
#include "morphkit/slerp.hpp"

namespace morphkit {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string kind_summary(const std::vector<InterventionKind::Kind>& kinds) {
  std::string out;
  std::size_t i = 0;
  while (i < kinds.size()) {
    std::size_t j = i;
    while (j < kinds.size() && kinds[j] == kinds[i]) ++j;
    if (!out.empty()) out += ",";
    out += std::string(to_string(kinds[i])) + ":" + std::to_string(i) + "-" + std::to_string(j - 1);
    i = j;
  }
  return out;
}

std::uint64_t noise_seed(std::uint64_t seed, int frame) {
  return mix_seed(seed, 0x6e6f697365ull + static_cast<std::uint64_t>(frame));
}

}  // namespace

ResolvedPrompts resolve_prompts(const MorphRequest& req, CaptionProvider* provider) {
  ResolvedPrompts out;
  bool used_user = false;
  bool used_provider = false;
  auto take = [&](const std::optional<std::string>& given, const Image& image, const char* which,
                  std::string& dst) {
    if (given) {
      dst = *given;
      used_user = true;
      return;
    }
    if (!provider) {
      throw Error(ErrorCode::config, std::string("no ") + which +
                                         " prompt given and no caption provider configured");
    }
    dst = provider->caption(image, which);
    used_provider = true;
  };
  take(req.prompt_left, req.left_image, "left", out.left);
  take(req.prompt_right, req.right_image, "right", out.right);
  if (used_user && used_provider) out.source = "user+" + provider->name();
  else if (used_provider) out.source = provider->name();
  else out.source = "user";
  return out;
}

void RunManifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

std::optional<std::string> RunManifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string RunManifest::to_text() const {
  std::string out = "schema=1\n";
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

RunManifest RunManifest::parse(const std::string& text) {
  RunManifest m;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != "schema=1") throw Error(ErrorCode::io, "run manifest lacks the schema=1 header");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::io, "malformed manifest line: " + line);
    m.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  if (first) throw Error(ErrorCode::io, "empty run manifest");
  return m;
}

std::uint64_t MorphResult::latent_checksum() const {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < final.member_count(); ++i) h = checksum(final.frame(i).data.values(), h);
  return h;
}

Image fit_to_resolution(const Image& image, int width, int height) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorCode::invalid_argument, "empty image");
  if (image.width == width && image.height == height) return image;
  const double scale = std::max(double(width) / image.width, double(height) / image.height);
  const int rw = std::max(width, static_cast<int>(std::ceil(image.width * scale - 1e-9)));
  const int rh = std::max(height, static_cast<int>(std::ceil(image.height * scale - 1e-9)));
  Image resized = resize_bicubic(image, rw, rh);
  Image out(width, height);
  const int ox = (rw - width) / 2;
  const int oy = (rh - height) / 2;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = resized.at(x + ox, y + oy, c);
  return out;
}

MorphResult morph(const MorphRequest& req, const Backend& backend, const PipelineOptions& options) {
  const auto total_start = Clock::now();
  const MorphConfig& cfg = validate_config(req.config);
  if (backend.schedule().total_steps != cfg.steps) {
    throw Error(ErrorCode::config, "backend built for " + std::to_string(backend.schedule().total_steps) +
                                       " steps, config asks for " + std::to_string(cfg.steps));
  }

  MorphResult result;
  result.variant = options.ablation.label;
  try {
    result.prompts = resolve_prompts(req, options.caption_provider);
  } catch (const Error& e) {
    throw e.with_context("prompts");
  }
  if (req.edit_mode) {
    if (!(req.left_image == req.right_image))
      throw Error(ErrorCode::config, "edit mode needs the same image on both sides");
    if (result.prompts.left == result.prompts.right)
      throw Error(ErrorCode::config, "edit mode needs differing prompts");
  }

  // Encode endpoints and initialise the intermediates on the great circle.
  auto t0 = Clock::now();
  try {
    result.left_input = fit_to_resolution(req.left_image, backend.image_width(), backend.image_height());
    result.right_input = fit_to_resolution(req.right_image, backend.image_width(), backend.image_height());
  } catch (const Error& e) {
    throw e.with_context("resize");
  }
  LatentBundle bundle;
  try {
    bundle.left = Latent{backend.encode(result.left_input), LatentRole::left(), 0};
    bundle.right = Latent{backend.encode(result.right_input), LatentRole::right(), 0};
    bundle.intermediates =
        interpolation_grid(bundle.left, bundle.right, cfg.frames, cfg.slerp_eps).latents;
  } catch (const Error& e) {
    throw e.with_context("encode");
  }
  result.initial = bundle;
  const double encode_ms = ms_since(t0);

  FrameEmbeddings emb;
  emb.left = backend.embed_text(result.prompts.left);
  emb.left.source = TextEmbedding::Source::left_prompt;
  emb.right = backend.embed_text(result.prompts.right);
  emb.right.source = TextEmbedding::Source::right_prompt;
  emb.unconditional = backend.unconditional_embedding();
  for (int j = 1; j <= cfg.frames; ++j) {
    double a = alpha_for_frame(j, cfg.frames);
    result.stage_log.frame_alpha.push_back(a);
    switch (cfg.conditioning) {
      case FrameConditioning::blend: emb.intermediates.push_back(blend_text_embeddings(emb.left, emb.right, a)); break;
      case FrameConditioning::left: emb.intermediates.push_back(emb.left); break;
      case FrameConditioning::right: emb.intermediates.push_back(emb.right); break;
    }
  }

  DiffusionOptions dopts;
  dopts.backend = &backend;
  dopts.config = cfg;
  dopts.plan = StagePlan::from_config(cfg);
  dopts.ablation = options.ablation;
  dopts.record_trajectories = options.record_trajectories;

  t0 = Clock::now();
  result.forward_trajectories = invert(bundle, dopts, emb, &result.stage_log);
  result.inverted = bundle;
  const double forward_ms = ms_since(t0);

  t0 = Clock::now();
  const bool inject = options.ablation.enabled(Component::noise_injection);
  if (inject) {
    try {
      const Shape& shape = bundle.left.data.shape();
      SpectralMask mask = retain_mask(static_cast<int>(shape.at(1)), static_cast<int>(shape.at(2)),
                                      cfg.noise_cutoff, cfg.transform, cfg.noise_band);
      for (Latent& m : bundle.intermediates)
        m.data = inject_noise(m.data, mask, noise_seed(cfg.seed, m.role.index));
    } catch (const Error& e) {
      throw e.with_context("noise injection");
    }
  }
  result.noised = bundle;
  const double noise_ms = ms_since(t0);

  t0 = Clock::now();
  result.reverse_trajectories = denoise(bundle, dopts, emb, &result.stage_log);
  result.final = bundle;
  const double reverse_ms = ms_since(t0);

  t0 = Clock::now();
  try {
    for (std::size_t i = 0; i < bundle.member_count(); ++i)
      result.frames.push_back(backend.decode(bundle.frame(i).data));
  } catch (const Error& e) {
    throw e.with_context("decode");
  }
  const double decode_ms = ms_since(t0);

  RunManifest& m = result.manifest;
  m.set("variant", result.variant);
  m.set("backend", backend.name());
  for (const auto& key : config_keys()) m.set("config." + key, get_config_value(cfg, key));
  m.set("input.left", one_line(req.left_label));
  m.set("input.right", one_line(req.right_label));
  m.set("input.resize", "bicubic aspect-fill, center-crop " + std::to_string(backend.image_width()) +
                            "x" + std::to_string(backend.image_height()));
  m.set("edit_mode", req.edit_mode ? "1" : "0");
  m.set("prompt.left", one_line(result.prompts.left));
  m.set("prompt.right", one_line(result.prompts.right));
  m.set("prompt.source", result.prompts.source);
  m.set("prompt.frames", std::string(to_string(cfg.conditioning)));
  m.set("ablation.disabled", [&] {
    std::string s;
    for (auto c : options.ablation.disabled) s += (s.empty() ? "" : ",") + std::string(to_string(c));
    return s.empty() ? std::string("none") : s;
  }());
  m.set("ablation.swap_order", options.ablation.swap_order ? "1" : "0");
  m.set("frame.count", std::to_string(result.frames.size()));
  for (std::size_t j = 0; j < result.stage_log.frame_alpha.size(); ++j)
    m.set("frame.alpha." + std::to_string(j + 1), fmt(result.stage_log.frame_alpha[j]));
  m.set("stage.forward", kind_summary(result.stage_log.forward));
  m.set("stage.reverse", kind_summary(result.stage_log.reverse));
  m.set("stage.cache_reads.forward", std::to_string(result.stage_log.forward_cache_reads));
  m.set("stage.cache_reads.reverse", std::to_string(result.stage_log.reverse_cache_reads));
  m.set("stage.predictions", std::to_string(result.stage_log.predictions));
  m.set("noise.injected", inject ? "1" : "0");
  for (int j = 1; j <= cfg.frames && inject; ++j)
    m.set("noise.seed." + std::to_string(j), std::to_string(noise_seed(cfg.seed, j)));
  for (std::size_t i = 0; i < result.final.member_count(); ++i)
    m.set("latent.checksum." + std::to_string(i), hex64(checksum(result.final.frame(i).data.values())));
  m.set("latent.checksum", hex64(result.latent_checksum()));
  m.set("timing.encode_ms", fmt(encode_ms));
  m.set("timing.forward_ms", fmt(forward_ms));
  m.set("timing.noise_ms", fmt(noise_ms));
  m.set("timing.reverse_ms", fmt(reverse_ms));
  m.set("timing.decode_ms", fmt(decode_ms));
  m.set("timing.total_ms", fmt(ms_since(total_start)));
  return result;
}

MorphResult ablate(const MorphRequest& req, const Backend& backend, const Ablation& ablation,
                   CaptionProvider* provider) {
  PipelineOptions opts;
  opts.ablation = ablation;
  opts.caption_provider = provider;
  return morph(req, backend, opts);
}

}  // namespace morphkit
