#pragma once

#include <vector>

namespace morphkit {

enum class BetaKind { linear, scaled_linear };

// Training-time beta schedule. The DDIM schedule subsamples `train_steps`
// training timesteps down to T steps; train_steps == 0 means one training
// step per DDIM step.
struct BetaSpec {
  BetaKind kind = BetaKind::scaled_linear;
  double beta_min = 0.00085;
  double beta_max = 0.012;
  int train_steps = 1000;
};

// Cumulative signal levels for a T-step deterministic DDIM run.
//
// Index t runs over DDIM timesteps 0..T; alpha_bar[0] is the clean-image
// level. alpha[t - 1] holds the per-step ratio alpha_bar[t] / alpha_bar[t - 1]
// for t = 1..T, and sigma[t - 1] the stochastic scale (zero when
// deterministic).
struct NoiseSchedule {
  int total_steps = 0;
  std::vector<double> alpha_bar;       // T + 1 entries
  std::vector<double> alpha;           // T entries
  std::vector<double> sigma;           // T entries
  std::vector<int> train_timestep;     // T + 1 entries; model time index per DDIM timestep
  BetaSpec beta_spec;

  double alpha_bar_at(int t) const { return alpha_bar.at(static_cast<std::size_t>(t)); }
  bool deterministic() const;
};

// Throws ErrorCode::config naming the offending field.
NoiseSchedule build_schedule(int total_steps, const BetaSpec& spec);

}  // namespace morphkit
