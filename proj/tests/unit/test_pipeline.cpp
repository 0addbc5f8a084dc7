#include <doctest.h>

#include <cmath>

#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/pipeline.hpp"
#include "morphkit/toy_backend.hpp"
#include "test_helpers.hpp"

using namespace morphkit;

namespace {

MorphRequest request(int steps = 10, int frames = 3) {
  MorphRequest r;
  r.left_image = testutil::smooth_image(128, 128, 0);
  r.right_image = testutil::smooth_image(128, 128, 1);
  r.prompt_left = "a glowing orb";
  r.prompt_right = "a wavy pattern";
  r.config.steps = steps;
  r.config.frames = frames;
  r.config.seed = 42;
  return r;
}

}  // namespace

TEST_CASE("morph produces J + 2 frames deterministically") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  MorphResult a = morph(req, backend), b = morph(req, backend);
  REQUIRE(a.frames.size() == 5);
  for (const auto& f : a.frames) {
    CHECK(f.width == 128);
    CHECK(f.height == 128);
  }
  CHECK(a.latent_checksum() == b.latent_checksum());
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.final.frame(i).data == b.final.frame(i).data);
  CHECK(a.manifest.to_text() != "");
  CHECK(a.manifest.get("variant") == "full");
  CHECK(a.manifest.get("frame.count") == "5");
  CHECK(a.manifest.get("config.seed") == "42");
  CHECK(a.manifest.get("prompt.source") == "user");

  req.config.seed = 43;
  CHECK(morph(req, backend).latent_checksum() != a.latent_checksum());

  for (std::size_t i = 0; i + 1 < 5; ++i) {
    double d = l2_distance(a.final.frame(i).data, a.final.frame(i + 1).data);
    CHECK(std::isfinite(d));
    CHECK(d > 0.0);
  }
}

TEST_CASE("identical inputs and prompts give identical frames") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  req.right_image = req.left_image;
  req.prompt_right = req.prompt_left;
  MorphResult r = morph(req, backend);
  for (const auto& f : r.frames) CHECK(rms_diff(f, r.frames.front()) <= backend.roundtrip_tolerance());
}

TEST_CASE("stage log covers every step once") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  MorphResult r = morph(req, backend);
  const auto& log = r.stage_log;
  REQUIRE(log.forward.size() == 10);
  REQUIRE(log.reverse.size() == 10);
  StagePlan plan = StagePlan::from_config(req.config);
  for (int t = 0; t < 10; ++t) {
    CHECK(log.forward[t] == stage_for_step(t, Phase::forward, plan));
    CHECK(log.reverse[t] == stage_for_step(t, Phase::reverse, plan));
  }
  // b1 = 3: forward steps 3..9 read the cache, once per layer and intermediate
  CHECK(log.forward_cache_reads == 2u * 7u * 3u);
  // b4 = 6: reverse steps 0..5, both guidance branches
  CHECK(log.reverse_cache_reads == 2u * 6u * 3u * 2u);
  CHECK(log.frame_alpha == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("swapping inputs mirrors the frame weights") {
  ToyBackend backend(0, 10);
  MorphRequest req = request(10, 4);
  MorphRequest swapped = req;
  std::swap(swapped.left_image, swapped.right_image);
  std::swap(swapped.prompt_left, swapped.prompt_right);
  auto a = morph(req, backend).stage_log.frame_alpha;
  auto b = morph(swapped, backend).stage_log.frame_alpha;
  REQUIRE(a.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(a[j] == doctest::Approx(1.0 - b[3 - j]).epsilon(1e-15));
    if (j > 0) CHECK(a[j] > a[j - 1]);
  }
}

TEST_CASE("disabling noise injection leaves the inverted latents untouched") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  MorphResult r = ablate(req, backend, Ablation::from_label("wo_noise_injection"));
  for (std::size_t i = 0; i < r.inverted.member_count(); ++i)
    CHECK(r.noised.frame(i).data == r.inverted.frame(i).data);
  CHECK(r.manifest.get("variant") == "wo_noise_injection");
  CHECK(r.manifest.get("noise.injected") == "0");

  MorphResult full = morph(req, backend);
  CHECK(full.noised.left.data == full.inverted.left.data);
  CHECK(full.noised.right.data == full.inverted.right.data);
  CHECK(full.noised.intermediates[0].data != full.inverted.intermediates[0].data);
}

TEST_CASE("ablation with nothing disabled equals morph") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  CHECK(ablate(req, backend, Ablation::from_components({})).latent_checksum() == morph(req, backend).latent_checksum());
  CHECK(ablate(req, backend, Ablation::from_label("only_spherical_prior")).latent_checksum() !=
        morph(req, backend).latent_checksum());
}

TEST_CASE("endpoints reconstruct their inputs without guidance") {
  ToyBackend backend(0, 50);
  MorphRequest req = request(50, 5);
  req.config.cfg_scale = 1.0;
  PipelineOptions opts;
  opts.record_trajectories = true;
  MorphResult r = morph(req, backend, opts);
  CHECK(relative_l2(r.final.left.data, r.initial.left.data) <= 5e-2);
  CHECK(relative_l2(r.final.right.data, r.initial.right.data) <= 5e-2);
  REQUIRE(r.forward_trajectories.size() == 7);
  CHECK(r.forward_trajectories[0].states.size() == 51);
  CHECK(r.forward_trajectories[0].states.front().timestep == 0);
  CHECK(r.forward_trajectories[0].states.back().timestep == 50);
  CHECK(r.reverse_trajectories[3].states.back().timestep == 0);
}

TEST_CASE("prompt resolution") {
  MorphRequest req;
  req.prompt_left = "a";
  req.prompt_right = "b";
  ResolvedPrompts p = resolve_prompts(req, nullptr);
  CHECK(p.left == "a");
  CHECK(p.right == "b");
  CHECK(p.source == "user");

  EchoCaptionProvider echo("left caption", "right caption");
  MorphRequest none;
  p = resolve_prompts(none, &echo);
  CHECK(p.left == "left caption");
  CHECK(p.right == "right caption");
  CHECK(p.source == "echo");

  MorphRequest half;
  half.prompt_left = "mine";
  p = resolve_prompts(half, &echo);
  CHECK(p.left == "mine");
  CHECK(p.right == "right caption");
  CHECK(p.source == "user+echo");

  try {
    resolve_prompts(none, nullptr);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
  }
}

TEST_CASE("request validation") {
  ToyBackend backend(0, 10);
  MorphRequest req = request();
  req.config.steps = 20;
  CHECK_THROWS_AS(morph(req, backend), Error);

  req = request();
  req.edit_mode = true;
  CHECK_THROWS_AS(morph(req, backend), Error);  // images differ
  req.right_image = req.left_image;
  MorphResult edit = morph(req, backend);
  CHECK(edit.frames.size() == 5);
  CHECK(edit.manifest.get("edit_mode") == "1");
  req.prompt_right = req.prompt_left;
  CHECK_THROWS_AS(morph(req, backend), Error);  // prompts equal

  req = request();
  req.config.frames = 0;
  try {
    morph(req, backend);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
  }
}

TEST_CASE("run manifest text roundtrip") {
  RunManifest m;
  m.set("variant", "full");
  m.set("config.frames", "5");
  m.set("variant", "wo_spherical");
  RunManifest back = RunManifest::parse(m.to_text());
  CHECK(back.get("variant") == "wo_spherical");
  CHECK(back.get("config.frames") == "5");
  CHECK_FALSE(back.get("missing").has_value());
  CHECK(m.to_text().rfind("schema=1\n", 0) == 0);
  CHECK_THROWS_AS(RunManifest::parse("variant=full\n"), Error);

  ToyBackend backend(0, 10);
  MorphResult r = morph(request(), backend);
  MorphConfig reloaded = parse_config(r.manifest.to_text());
  CHECK(reloaded == request().config);
}

TEST_CASE("fit to resolution fills and crops") {
  Image wide(300, 100, 0.5f);
  Image out = fit_to_resolution(wide, 128, 128);
  CHECK(out.width == 128);
  CHECK(out.height == 128);
  for (float v : out.rgb) CHECK(v == doctest::Approx(0.5f).epsilon(1e-5));
  CHECK_THROWS_AS(fit_to_resolution(Image(), 128, 128), Error);
}
