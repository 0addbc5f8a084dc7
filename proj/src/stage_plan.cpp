#include "morphkit/stage_plan.hpp"

#include <cmath>

#include "morphkit/error.hpp"

namespace morphkit {
namespace {

int boundary(double lambda, int steps) {
  return static_cast<int>(std::floor(lambda * double(steps)));
}

struct NamedVariant {
  const char* label;
  std::set<Component> disabled;
  bool swap_order;
};

const std::vector<NamedVariant>& variants() {
  using C = Component;
  static const std::vector<NamedVariant> table = {
      {"full", {}, false},
      {"only_prior", {C::spherical, C::step_oriented, C::noise_injection}, false},
      {"only_spherical", {C::prior, C::step_oriented, C::noise_injection}, false},
      {"only_spherical_prior", {C::step_oriented, C::noise_injection}, false},
      {"wo_noise_injection", {C::noise_injection}, false},
      {"wo_spherical", {C::spherical}, false},
      {"wo_prior", {C::prior}, false},
      {"wo_step_oriented", {C::step_oriented}, false},
      {"var_a", {C::original_tail}, false},
      {"var_b", {}, true},
  };
  return table;
}

}  // namespace

StagePlan StagePlan::from_config(const MorphConfig& cfg) {
  validate_config(cfg);
  StagePlan p;
  p.steps = cfg.steps;
  p.lambda1 = cfg.lambda1;
  p.lambda2 = cfg.lambda2;
  p.lambda3 = cfg.lambda3;
  p.lambda4 = cfg.lambda4;
  p.b1 = boundary(cfg.lambda1, cfg.steps);
  p.b2 = boundary(cfg.lambda2, cfg.steps);
  p.b3 = boundary(cfg.lambda3, cfg.steps);
  p.b4 = boundary(cfg.lambda4, cfg.steps);
  return p;
}

InterventionKind::Kind stage_for_step(int t, Phase phase, const StagePlan& plan) {
  using K = InterventionKind::Kind;
  if (t < 0 || t >= plan.steps)
    throw Error(ErrorCode::out_of_range, "step " + std::to_string(t) + " outside [0, " +
                                             std::to_string(plan.steps) + ")");
  if (phase == Phase::forward) {
    if (t < plan.b1) return K::original;
    if (t < plan.b2) return K::prior_driven;
    return K::step_oriented;
  }
  if (t < plan.b3) return K::step_oriented;
  if (t < plan.b4) return K::spherical_aggregation;
  return K::original;
}

const char* to_string(Component c) {
  switch (c) {
    case Component::spherical: return "spherical";
    case Component::prior: return "prior";
    case Component::step_oriented: return "step_oriented";
    case Component::noise_injection: return "noise_injection";
    case Component::original_tail: return "original_tail";
  }
  return "?";
}

Ablation Ablation::from_label(const std::string& label) {
  for (const auto& v : variants()) {
    if (label == v.label) return Ablation{v.label, v.disabled, v.swap_order};
  }
  std::string valid;
  for (const auto& l : labels()) valid += (valid.empty() ? "" : ", ") + l;
  throw Error(ErrorCode::config, "unknown variant '" + label + "'; valid variants: " + valid);
}

Ablation Ablation::from_components(const std::set<Component>& disabled) {
  for (const auto& v : variants())
    if (!v.swap_order && v.disabled == disabled) return Ablation{v.label, disabled, false};
  std::string label = "custom";
  for (auto c : disabled) label += std::string("_") + to_string(c);
  return Ablation{label, disabled, false};
}

const std::vector<std::string>& Ablation::labels() {
  static const std::vector<std::string> l = [] {
    std::vector<std::string> out;
    for (const auto& v : variants()) out.push_back(v.label);
    return out;
  }();
  return l;
}

InterventionKind::Kind effective_stage(int t, Phase phase, const StagePlan& plan,
                                       const Ablation& ablation) {
  using K = InterventionKind::Kind;
  K kind = stage_for_step(t, phase, plan);

  if (ablation.swap_order) {
    // Guidance-aware stages and the step-oriented stage trade step ranges.
    if (phase == Phase::forward) {
      if (kind == K::prior_driven) kind = K::step_oriented;
      else if (kind == K::step_oriented) kind = K::prior_driven;
    } else {
      if (kind == K::step_oriented) kind = K::spherical_aggregation;
      else if (kind == K::spherical_aggregation) kind = K::step_oriented;
    }
  }

  if (kind == K::original && !ablation.enabled(Component::original_tail)) {
    kind = phase == Phase::forward ? K::prior_driven : K::spherical_aggregation;
  }

  switch (kind) {
    case K::spherical_aggregation:
      return ablation.enabled(Component::spherical) ? kind : K::original;
    case K::prior_driven:
      return ablation.enabled(Component::prior) ? kind : K::original;
    case K::step_oriented:
      return ablation.enabled(Component::step_oriented) ? kind : K::original;
    case K::original:
      return kind;
  }
  return kind;
}

}  // namespace morphkit
