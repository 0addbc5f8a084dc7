#pragma once

#include <vector>

#include "morphkit/schedule.hpp"
#include "morphkit/types.hpp"

namespace morphkit {

struct NoisePrediction {
  Tensor eps;
  TextEmbedding::Source conditioned_on = TextEmbedding::Source::other;
};

// x_t -> x_{t-1}, deterministic (sigma = 0). eps is the prediction at (x_t, t).
Tensor ddim_reverse_step(const Tensor& x_t, const Tensor& eps, int t, const NoiseSchedule& sched);

// x_{t-1} -> x_t, the exact algebraic inverse of ddim_reverse_step for a
// shared eps. eps is the prediction at (x_{t-1}, t - 1).
Tensor ddim_forward_step(const Tensor& x_prev, const Tensor& eps, int t,
                         const NoiseSchedule& sched);

// uncond + scale * (cond - uncond)
NoisePrediction cfg_combine(const NoisePrediction& uncond, const NoisePrediction& cond,
                            double scale);

struct Trajectory {
  enum class Direction { forward_diffusion, reverse_denoising };

  Direction direction = Direction::forward_diffusion;
  LatentRole role;
  std::vector<Latent> states;  // T + 1 entries, consecutive timesteps
};

}  // namespace morphkit
