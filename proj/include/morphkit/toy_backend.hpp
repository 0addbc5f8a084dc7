#pragma once

#include <cstdint>
#include <vector>

#include "morphkit/backend.hpp"

namespace morphkit {

// Deterministic desk-scale denoiser with fixed seeded weights.
//
// Latents are (4, 16, 16). The trunk is a 3x3 conv with a timestep bias, a
// 4-head self-attention over the 16x16 token grid ("down.attn1"), a
// cross-attention onto the text tokens, a 2x2 pool, a second 4-head
// self-attention over the 8x8 grid ("mid.attn1"), nearest upsampling with a
// skip connection and an output 3x3 conv. Images are 128x128; encode is an
// 8x8 average pool followed by a fixed 3 -> 4 channel projection with
// orthonormal columns and decode is its transpose.
//
// The prediction is the sum of that trunk and a closed-form Gaussian-prior
// denoiser applied per frequency bin: nearly flat prior at low frequencies,
// tight prior at high frequencies, so high-band noise is removed on the way
// back while the low band inverts almost exactly.
class ToyBackend : public Backend {
 public:
  static constexpr int kChannels = 4;
  static constexpr int kLatentSize = 16;
  static constexpr int kPool = 8;
  static constexpr int kWidth = 32;       // model width
  static constexpr int kHeads = 4;
  static constexpr int kTextTokens = 8;
  static constexpr int kTextDim = 32;

  explicit ToyBackend(std::uint64_t seed = 0, int steps = 50);

  std::string name() const override { return "toy"; }
  int image_width() const override { return kLatentSize * kPool; }
  int image_height() const override { return kLatentSize * kPool; }
  Shape latent_shape() const override;
  const NoiseSchedule& schedule() const override { return schedule_; }
  double roundtrip_tolerance() const override { return 0.03; }

  Tensor encode(const Image& image) const override;
  Image decode(const Tensor& latent) const override;
  TextEmbedding embed_text(const std::string& prompt) const override;
  Tensor predict_noise(const Tensor& latent, int t, const TextEmbedding& text,
                       AttentionHook* hook, const LatentRole& owner) const override;
  std::vector<std::string> self_attention_layers() const override;

  static BetaSpec default_beta_spec();

 private:
  struct AttentionWeights {
    std::vector<float> wq, wk, wv, wo;  // row-major (in, out)
  };

  std::uint64_t seed_;
  NoiseSchedule schedule_;
  std::vector<float> projection_;  // (4, 3), orthonormal columns
  std::vector<float> time_w1_, time_w2_;
  std::vector<float> conv_in_, conv_in_bias_;
  AttentionWeights self1_, cross_, self2_;
  std::vector<float> mid_w_, mid_bias_;
  std::vector<float> conv_out_;
  std::vector<float> precision_;  // (16, 16) prior precision per frequency bin
};

}  // namespace morphkit
