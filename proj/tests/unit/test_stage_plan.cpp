#include <doctest.h>

#include <string>

#include "morphkit/error.hpp"
#include "morphkit/stage_plan.hpp"

using namespace morphkit;
using K = InterventionKind::Kind;

namespace {

StagePlan plan_for(double l1, double l2, double l3, double l4, int steps = 50) {
  MorphConfig cfg;
  cfg.lambda1 = l1;
  cfg.lambda2 = l2;
  cfg.lambda3 = l3;
  cfg.lambda4 = l4;
  cfg.steps = steps;
  return StagePlan::from_config(cfg);
}

std::string row(Phase phase, const StagePlan& p, const Ablation& a = {}) {
  std::string s;
  for (int t = 0; t < p.steps; ++t) {
    switch (effective_stage(t, phase, p, a)) {
      case K::original: s += 'O'; break;
      case K::prior_driven: s += 'P'; break;
      case K::spherical_aggregation: s += 'S'; break;
      case K::step_oriented: s += 'T'; break;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("default stage table for fifty steps") {
  StagePlan p = plan_for(0.3, 0.6, 0.2, 0.6);
  CHECK(p.b1 == 15);
  CHECK(p.b2 == 30);
  CHECK(p.b3 == 10);
  CHECK(p.b4 == 30);
  for (int t = 0; t < 50; ++t) {
    CHECK(stage_for_step(t, Phase::forward, p) == (t < 15 ? K::original : t < 30 ? K::prior_driven : K::step_oriented));
    CHECK(stage_for_step(t, Phase::reverse, p) ==
          (t < 10 ? K::step_oriented : t < 30 ? K::spherical_aggregation : K::original));
  }
  CHECK(row(Phase::forward, p) == std::string(15, 'O') + std::string(15, 'P') + std::string(20, 'T'));
  CHECK(row(Phase::reverse, p) == std::string(10, 'T') + std::string(20, 'S') + std::string(20, 'O'));
}

TEST_CASE("collapsed forward boundaries") {
  StagePlan p = plan_for(0.0, 0.0, 0.2, 0.6);
  CHECK(row(Phase::forward, p) == std::string(50, 'T'));
  StagePlan q = plan_for(1.0, 1.0, 1.0, 1.0);
  CHECK(row(Phase::forward, q) == std::string(50, 'O'));
  CHECK(row(Phase::reverse, q) == std::string(50, 'T'));
}

TEST_CASE("boundaries floor lambda times steps") {
  StagePlan p = plan_for(0.33, 0.67, 0.25, 0.75, 7);
  CHECK(p.b1 == 2);
  CHECK(p.b2 == 4);
  CHECK(p.b3 == 1);
  CHECK(p.b4 == 5);
  CHECK_THROWS_AS(stage_for_step(7, Phase::forward, p), Error);
  CHECK_THROWS_AS(stage_for_step(-1, Phase::reverse, p), Error);
  CHECK_THROWS_AS(plan_for(0.7, 0.6, 0.2, 0.6), Error);
}

TEST_CASE("every step gets exactly one stage") {
  StagePlan p = plan_for(0.3, 0.6, 0.2, 0.6);
  for (const auto& label : Ablation::labels()) {
    Ablation a = Ablation::from_label(label);
    CHECK(row(Phase::forward, p, a).size() == 50);
    CHECK(row(Phase::reverse, p, a).size() == 50);
  }
}

TEST_CASE("ablation variants") {
  StagePlan p = plan_for(0.3, 0.6, 0.2, 0.6);
  const auto& labels = Ablation::labels();
  CHECK(labels.front() == "full");
  CHECK(labels.size() == 10);
  try {
    Ablation::from_label("bogus");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(std::string(e.what()).find("wo_noise_injection") != std::string::npos);
  }

  CHECK(row(Phase::reverse, p, Ablation::from_label("wo_spherical")) ==
        std::string(10, 'T') + std::string(40, 'O'));
  CHECK(row(Phase::forward, p, Ablation::from_label("wo_prior")) ==
        std::string(30, 'O') + std::string(20, 'T'));
  CHECK(row(Phase::forward, p, Ablation::from_label("wo_step_oriented")) ==
        std::string(15, 'O') + std::string(15, 'P') + std::string(20, 'O'));
  CHECK(row(Phase::forward, p, Ablation::from_label("only_prior")) ==
        std::string(15, 'O') + std::string(15, 'P') + std::string(20, 'O'));
  CHECK(row(Phase::reverse, p, Ablation::from_label("only_spherical")) ==
        std::string(10, 'O') + std::string(20, 'S') + std::string(20, 'O'));
  // no original tail: the guidance-aware stage runs to the end
  CHECK(row(Phase::forward, p, Ablation::from_label("var_a")) ==
        std::string(30, 'P') + std::string(20, 'T'));
  CHECK(row(Phase::reverse, p, Ablation::from_label("var_a")) ==
        std::string(10, 'T') + std::string(40, 'S'));
  CHECK(row(Phase::forward, p, Ablation::from_label("var_b")) ==
        std::string(15, 'O') + std::string(15, 'T') + std::string(20, 'P'));
  CHECK(row(Phase::reverse, p, Ablation::from_label("var_b")) ==
        std::string(10, 'S') + std::string(20, 'T') + std::string(20, 'O'));

  Ablation full = Ablation::from_label("full");
  CHECK(row(Phase::forward, p, full) == row(Phase::forward, p));
  CHECK(Ablation::from_components({Component::noise_injection}).label == "wo_noise_injection");
  CHECK(Ablation::from_components({}).label == "full");
}
