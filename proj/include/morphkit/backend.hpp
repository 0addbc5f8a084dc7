#pragma once

#include <memory>
#include <string>
#include <vector>

#include "morphkit/attention.hpp"
#include "morphkit/ddim.hpp"
#include "morphkit/schedule.hpp"
#include "morphkit/types.hpp"

namespace morphkit {

// What every diffusion backend provides to the pipeline.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  // Image resolution the backend encodes (inputs are resized to this).
  virtual int image_width() const = 0;
  virtual int image_height() const = 0;
  virtual Shape latent_shape() const = 0;
  virtual const NoiseSchedule& schedule() const = 0;
  // RMS pixel error decode(encode(img)) may show on smooth images.
  virtual double roundtrip_tolerance() const = 0;

  virtual Tensor encode(const Image& image) const = 0;
  virtual Image decode(const Tensor& latent) const = 0;
  virtual TextEmbedding embed_text(const std::string& prompt) const = 0;
  TextEmbedding unconditional_embedding() const;

  // Noise prediction at DDIM timestep t. When hook is null every
  // self-attention site runs plain attention; otherwise each site calls the
  // hook exactly once with a stable layer id.
  virtual Tensor predict_noise(const Tensor& latent, int t, const TextEmbedding& text,
                               AttentionHook* hook, const LatentRole& owner) const = 0;

  virtual std::vector<std::string> self_attention_layers() const = 0;
};

}  // namespace morphkit
