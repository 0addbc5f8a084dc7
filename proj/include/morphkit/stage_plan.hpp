#pragma once

#include <set>
#include <string>
#include <vector>

#include "morphkit/attention.hpp"
#include "morphkit/config.hpp"

namespace morphkit {

// Step boundaries of the staged forward/reverse schedule:
// b_i = floor(lambda_i * T), intervals half-open.
struct StagePlan {
  int steps = 50;
  double lambda1 = 0.3;
  double lambda2 = 0.6;
  double lambda3 = 0.2;
  double lambda4 = 0.6;
  int b1 = 15;
  int b2 = 30;
  int b3 = 10;
  int b4 = 30;

  static StagePlan from_config(const MorphConfig& cfg);
};

// Forward: t < b1 original, t < b2 prior-driven, else step-oriented.
// Reverse: t < b3 step-oriented, t < b4 spherical aggregation, else original.
// t is the zero-based step counter within the phase.
InterventionKind::Kind stage_for_step(int t, Phase phase, const StagePlan& plan);

// Components that an ablation can switch off.
enum class Component { spherical, prior, step_oriented, noise_injection, original_tail };

const char* to_string(Component c);

// Named ablation variant. Disabled attention components fall back to
// original attention; a disabled original stage is absorbed by its
// neighbouring stage; swap_order exchanges the step ranges of the
// guidance-aware stages and the step-oriented stage in both phases.
struct Ablation {
  std::string label = "full";
  std::set<Component> disabled;
  bool swap_order = false;

  bool enabled(Component c) const { return !disabled.contains(c); }

  // Throws ErrorCode::config listing the valid labels.
  static Ablation from_label(const std::string& label);
  static Ablation from_components(const std::set<Component>& disabled);
  static const std::vector<std::string>& labels();
};

InterventionKind::Kind effective_stage(int t, Phase phase, const StagePlan& plan,
                                       const Ablation& ablation);

}  // namespace morphkit
