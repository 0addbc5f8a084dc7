#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morphkit/backend.hpp"

namespace morphkit {

// Layout facts read from a diffusers-style model directory
// (model_index.json, scheduler/scheduler_config.json, unet/config.json).
struct PretrainedModelInfo {
  std::string root;
  BetaSpec beta_spec;
  int sample_size = 96;         // latent side length
  int latent_channels = 4;
  int vae_scale_factor = 8;
  std::vector<std::string> self_attention_layers;  // discovered from the UNet config
};

// Heavy model execution (VAE, text encoder, UNet) lives behind this interface.
// A runtime receives the layer list and must call the hook once per listed
// layer per UNet evaluation.
class PretrainedRuntime {
 public:
  virtual ~PretrainedRuntime() = default;
  virtual Tensor encode(const Image& image) = 0;
  virtual Image decode(const Tensor& latent) = 0;
  virtual Tensor embed_text(const std::string& prompt) = 0;
  virtual Tensor unet(const Tensor& latent, int train_timestep, const Tensor& text,
                      const std::function<Tensor(const AttentionSite&)>& self_attention) = 0;
};

using RuntimeFactory =
    std::function<std::unique_ptr<PretrainedRuntime>(const PretrainedModelInfo&)>;

// Registers the runtime used by open_pretrained; none is linked by default.
void register_pretrained_runtime(RuntimeFactory factory);

struct AdapterStatus {
  bool available = false;
  std::string message;
  std::optional<PretrainedModelInfo> info;
};

// Model directory lookup: explicit model_ref, else $MORPHKIT_MODEL_DIR.
std::string resolve_model_dir(const std::string& model_ref);

// Reads the model directory without loading weights. Throws
// ErrorCode::unavailable with a remediation hint when files are missing.
PretrainedModelInfo inspect_model_dir(const std::string& dir);

// Self-attention layer ids for a UNet config (diffusers naming), e.g.
// "down_blocks.0.attentions.1.transformer_blocks.0.attn1".
std::vector<std::string> discover_self_attention_layers(const std::string& unet_config_json);

// Never throws for a missing model: reports unavailable instead.
AdapterStatus probe_pretrained(const std::string& model_ref);

// Full backend over the registered runtime. Throws ErrorCode::unavailable
// when weights or the runtime are absent.
std::unique_ptr<Backend> open_pretrained(const std::string& model_ref, int steps = 50);

}  // namespace morphkit
