#pragma once

#include <chrono>
#include <vector>

#include "morphkit/backend.hpp"
#include "morphkit/config.hpp"
#include "morphkit/ddim.hpp"
#include "morphkit/stage_plan.hpp"

namespace morphkit {

// Text conditioning for every bundle member plus the empty-prompt embedding.
struct FrameEmbeddings {
  TextEmbedding left;
  TextEmbedding right;
  TextEmbedding unconditional;
  std::vector<TextEmbedding> intermediates;  // frame 1..J

  const TextEmbedding& for_role(const LatentRole& role) const;
};

// Per-phase record of what the staged processes did.
struct StageLog {
  std::vector<InterventionKind::Kind> forward;
  std::vector<InterventionKind::Kind> reverse;
  std::vector<double> frame_alpha;   // alpha_j per intermediate
  std::size_t forward_cache_reads = 0;
  std::size_t reverse_cache_reads = 0;
  std::size_t predictions = 0;       // predict_noise calls
};

struct DiffusionOptions {
  const Backend* backend = nullptr;
  MorphConfig config;
  StagePlan plan;
  Ablation ablation;
  // Keep per-step latents (forward trajectories always start from timestep 0).
  bool record_trajectories = true;
};

// Forward diffusion of a timestep-0 bundle to timestep T under the staged
// attention plan. Returns one trajectory per member in frame order and
// leaves the bundle at timestep T.
std::vector<Trajectory> invert(LatentBundle& bundle, const DiffusionOptions& opts,
                               const FrameEmbeddings& embeddings, StageLog* log = nullptr);

// Reverse denoising of a timestep-T bundle to timestep 0 with classifier-free
// guidance at config.cfg_scale. Endpoints are co-simulated with original
// attention and supply keys and values to the intermediates.
std::vector<Trajectory> denoise(LatentBundle& bundle, const DiffusionOptions& opts,
                                const FrameEmbeddings& embeddings, StageLog* log = nullptr);

}  // namespace morphkit
