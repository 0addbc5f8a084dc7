#pragma once

#include <vector>

#include "morphkit/types.hpp"

namespace morphkit {

// Spherical interpolation between two latents, treating each as one
// flattened vector. Falls back to linear interpolation when the angle is
// within eps of 0 or pi. Throws degenerate_input when both inputs have zero
// norm.
Tensor slerp(const Tensor& a, const Tensor& b, double t, double eps = 1e-6);

// Angle between two flattened tensors, in [0, pi].
double latent_angle(const Tensor& a, const Tensor& b);

struct InterpolationGrid {
  std::vector<double> fractions;  // t_j = j / (J + 1), j = 1..J
  std::vector<Latent> latents;    // roles intermediate(1..J)
  double phi = 0.0;
};

InterpolationGrid interpolation_grid(const Latent& left, const Latent& right, int frames,
                                     double eps = 1e-6);

// (1 - alpha) * left + alpha * right, tagged as interpolated(alpha).
TextEmbedding blend_text_embeddings(const TextEmbedding& left, const TextEmbedding& right,
                                    double alpha);

}  // namespace morphkit
