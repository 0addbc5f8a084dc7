#pragma once

#include <string>
#include <vector>

#include "morphkit/tensor.hpp"

namespace morphkit {

// Identity of one trajectory in the morph bundle. Intermediate frames are
// numbered 1..J; the endpoints sit at positions 0 and J + 1.
struct LatentRole {
  enum class Kind { left, right, intermediate };

  Kind kind = Kind::left;
  int index = 0;  // frame number for intermediates, 0 otherwise

  static LatentRole left() { return {Kind::left, 0}; }
  static LatentRole right() { return {Kind::right, 0}; }
  static LatentRole intermediate(int j) { return {Kind::intermediate, j}; }

  bool is_endpoint() const noexcept { return kind != Kind::intermediate; }
  std::string name() const;

  friend auto operator<=>(const LatentRole&, const LatentRole&) = default;
};

struct Latent {
  Tensor data;  // (C, H, W)
  LatentRole role;
  int timestep = 0;
};

// Left endpoint, right endpoint and J intermediates advanced in lockstep.
struct LatentBundle {
  Latent left;
  Latent right;
  std::vector<Latent> intermediates;
  int timestep = 0;

  std::size_t member_count() const { return intermediates.size() + 2; }
  // Frame order: left, intermediates..., right.
  const Latent& frame(std::size_t position) const;
  Latent& frame(std::size_t position);
  void set_timestep(int t);
  // Throws when members disagree on timestep or shape.
  void check_consistent() const;
};

struct TextEmbedding {
  enum class Source { left_prompt, right_prompt, interpolated, unconditional, other };

  Tensor data;  // (tokens, embed_dim)
  Source source = Source::other;
  double alpha = 0.0;  // meaningful for Source::interpolated
};

std::string to_string(TextEmbedding::Source source);

// 8-bit sRGB is the on-disk format; the pipeline works on [0, 1] floats.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // HWC, 3 channels

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  float& at(int x, int y, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace morphkit
