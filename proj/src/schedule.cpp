#include "morphkit/schedule.hpp"

#include <cmath>
#include <string>

#include "morphkit/error.hpp"

namespace morphkit {

bool NoiseSchedule::deterministic() const {
  for (double s : sigma)
    if (s != 0.0) return false;
  return true;
}

NoiseSchedule build_schedule(int total_steps, const BetaSpec& spec) {
  if (total_steps < 2)
    throw Error(ErrorCode::config, "steps must be >= 2, got " + std::to_string(total_steps));
  if (!(spec.beta_min > 0.0 && spec.beta_min < 1.0))
    throw Error(ErrorCode::config, "beta_min must lie in (0, 1)");
  if (!(spec.beta_max > 0.0 && spec.beta_max < 1.0))
    throw Error(ErrorCode::config, "beta_max must lie in (0, 1)");
  if (spec.beta_max < spec.beta_min)
    throw Error(ErrorCode::config, "beta_max must not be below beta_min");
  const int train = spec.train_steps == 0 ? total_steps : spec.train_steps;
  if (train < total_steps)
    throw Error(ErrorCode::config, "train_steps must be >= steps (or 0)");

  // Cumulative product over the training betas.
  std::vector<double> train_alpha_bar(static_cast<std::size_t>(train));
  double running = 1.0;
  for (int i = 0; i < train; ++i) {
    double frac = train > 1 ? double(i) / double(train - 1) : 0.0;
    double beta = 0.0;
    if (spec.kind == BetaKind::linear) {
      beta = spec.beta_min + (spec.beta_max - spec.beta_min) * frac;
    } else {
      double s = std::sqrt(spec.beta_min) + (std::sqrt(spec.beta_max) - std::sqrt(spec.beta_min)) * frac;
      beta = s * s;
    }
    running *= 1.0 - beta;
    train_alpha_bar[static_cast<std::size_t>(i)] = running;
  }

  NoiseSchedule s;
  s.total_steps = total_steps;
  s.beta_spec = spec;
  s.alpha_bar.resize(static_cast<std::size_t>(total_steps) + 1);
  s.train_timestep.resize(static_cast<std::size_t>(total_steps) + 1);
  s.alpha_bar[0] = 1.0;
  s.train_timestep[0] = 0;
  for (int t = 1; t <= total_steps; ++t) {
    // DDIM step t lands on training step round(t * train / T) - 1.
    long long idx = std::llround(double(t) * double(train) / double(total_steps)) - 1;
    s.train_timestep[static_cast<std::size_t>(t)] = static_cast<int>(idx);
    s.alpha_bar[static_cast<std::size_t>(t)] = train_alpha_bar[static_cast<std::size_t>(idx)];
  }
  s.alpha.resize(static_cast<std::size_t>(total_steps));
  s.sigma.assign(static_cast<std::size_t>(total_steps), 0.0);
  for (int t = 1; t <= total_steps; ++t)
    s.alpha[static_cast<std::size_t>(t - 1)] = s.alpha_bar[t] / s.alpha_bar[t - 1];
  return s;
}

}  // namespace morphkit
