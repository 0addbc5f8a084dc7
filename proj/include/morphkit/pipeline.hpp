#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morphkit/backend.hpp"
#include "morphkit/config.hpp"
#include "morphkit/diffusion.hpp"
#include "morphkit/stage_plan.hpp"

namespace morphkit {

// Supplies prompts for images that arrive without one.
class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  virtual std::string name() const = 0;
  virtual std::string caption(const Image& image, const std::string& label) = 0;
};

// Returns fixed strings; used by tests and as a template for real providers.
class EchoCaptionProvider : public CaptionProvider {
 public:
  EchoCaptionProvider(std::string left, std::string right)
      : left_(std::move(left)), right_(std::move(right)) {}
  std::string name() const override { return "echo"; }
  std::string caption(const Image&, const std::string& label) override {
    return label == "left" ? left_ : right_;
  }

 private:
  std::string left_;
  std::string right_;
};

struct MorphRequest {
  Image left_image;
  Image right_image;
  std::string left_label = "left";    // path or name, recorded in the manifest
  std::string right_label = "right";
  std::optional<std::string> prompt_left;
  std::optional<std::string> prompt_right;
  MorphConfig config;
  bool edit_mode = false;
};

struct ResolvedPrompts {
  std::string left;
  std::string right;
  std::string source;  // "user", "<provider name>", or "user+<provider name>"
};

// Throws ErrorCode::config when a prompt is missing and no provider is set.
ResolvedPrompts resolve_prompts(const MorphRequest& req, CaptionProvider* provider);

// Key/value record of a run, written verbatim as manifest.txt.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  std::string to_text() const;  // "schema=1" first
  static RunManifest parse(const std::string& text);
};

struct MorphResult {
  Image left_input;   // resized endpoint images as fed to the encoder
  Image right_input;
  LatentBundle initial;   // timestep 0, slerp-initialised
  LatentBundle inverted;  // timestep T after forward diffusion
  LatentBundle noised;    // timestep T after spectral noise injection
  LatentBundle final;     // timestep 0 after reverse denoising
  std::vector<Trajectory> forward_trajectories;
  std::vector<Trajectory> reverse_trajectories;
  std::vector<Image> frames;  // J + 2 decoded frames, left to right
  StageLog stage_log;
  ResolvedPrompts prompts;
  std::string variant = "full";
  RunManifest manifest;

  // Checksum over the final latents in frame order.
  std::uint64_t latent_checksum() const;
};

struct PipelineOptions {
  Ablation ablation;
  CaptionProvider* caption_provider = nullptr;
  bool record_trajectories = false;
};

// Runs the full staged morph: encode, slerp initialisation, staged forward
// diffusion, spectral noise injection on the intermediates, staged reverse
// denoising with endpoint co-simulation under CFG, decode.
MorphResult morph(const MorphRequest& req, const Backend& backend,
                  const PipelineOptions& options = {});

// morph with the named ablation variant.
MorphResult ablate(const MorphRequest& req, const Backend& backend, const Ablation& ablation,
                   CaptionProvider* provider = nullptr);

// Aspect-filling bicubic resize followed by a centre crop.
Image fit_to_resolution(const Image& image, int width, int height);

}  // namespace morphkit
