#include <doctest.h>

#include <cmath>
#include <vector>

#include "morphkit/config.hpp"
#include "morphkit/error.hpp"
#include "morphkit/schedule.hpp"
#include "morphkit/tensor.hpp"
#include "morphkit/types.hpp"
#include "test_helpers.hpp"

using namespace morphkit;

namespace {

// scaled-linear cumulative products, straight scalar loop
std::vector<double> reference_alpha_bar(int T, double bmin, double bmax, int N) {
  std::vector<double> ab_train;
  double acc = 1.0;
  for (int i = 0; i < N; ++i) {
    double s = std::sqrt(bmin) + (std::sqrt(bmax) - std::sqrt(bmin)) * i / (N - 1.0);
    acc *= 1.0 - s * s;
    ab_train.push_back(acc);
  }
  std::vector<double> out{1.0};
  for (int t = 1; t <= T; ++t) out.push_back(ab_train[std::lround(t * double(N) / T) - 1]);
  return out;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("scaled-linear schedule matches an independent loop") {
  NoiseSchedule s = build_schedule(50, BetaSpec{BetaKind::scaled_linear, 0.00085, 0.012, 1000});
  auto ref = reference_alpha_bar(50, 0.00085, 0.012, 1000);
  REQUIRE(s.alpha_bar.size() == 51);
  for (int t = 0; t <= 50; ++t) CHECK(s.alpha_bar[t] == doctest::Approx(ref[t]).epsilon(1e-12));
  CHECK(s.alpha_bar[50] < 0.01);
  CHECK(s.alpha_bar[0] > 0.99);
  CHECK(s.alpha_bar[0] <= 1.0);
  for (int t = 1; t <= 50; ++t) {
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    CHECK(s.alpha_bar[t] > 0.0);
    CHECK(std::abs(s.alpha[t - 1] - s.alpha_bar[t] / s.alpha_bar[t - 1]) <= 1e-12 * s.alpha[t - 1]);
  }
  CHECK(s.deterministic());
  for (double v : s.sigma) CHECK(v == 0.0);
}

TEST_CASE("constant beta schedule in closed form") {
  NoiseSchedule s = build_schedule(2, BetaSpec{BetaKind::linear, 0.5, 0.5, 0});
  REQUIRE(s.alpha_bar.size() == 3);
  CHECK(s.alpha_bar[0] == 1.0);
  CHECK(s.alpha_bar[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.alpha_bar[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("schedule construction errors") {
  CHECK(code_of([] { build_schedule(1, BetaSpec{}); }) == ErrorCode::config);
  try {
    build_schedule(10, BetaSpec{BetaKind::linear, 0.0, 0.01, 1000});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("beta_min") != std::string::npos);
  }
  try {
    build_schedule(10, BetaSpec{BetaKind::linear, 0.02, 0.01, 1000});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("beta_max") != std::string::npos);
  }
}

TEST_CASE("schedule construction is pure") {
  BetaSpec spec{BetaKind::linear, 0.00085, 0.012, 1000};
  NoiseSchedule a = build_schedule(50, spec), b = build_schedule(50, spec);
  CHECK(a.alpha_bar == b.alpha_bar);
  CHECK(a.train_timestep == b.train_timestep);
  CHECK(a.train_timestep[50] == 999);
  CHECK(a.train_timestep[1] == 19);
}

TEST_CASE("config validation") {
  MorphConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(cfg.lambda1 == 0.3);
  CHECK(cfg.lambda2 == 0.6);
  CHECK(cfg.lambda3 == 0.2);
  CHECK(cfg.lambda4 == 0.6);
  CHECK(cfg.frames == 5);
  CHECK(cfg.steps == 50);
  CHECK(cfg.cfg_scale == 7.5);

  MorphConfig bad = cfg;
  bad.lambda1 = 0.7;
  CHECK(code_of([&] { validate_config(bad); }) == ErrorCode::config);

  bad = cfg;
  bad.frames = 0;
  CHECK(code_of([&] { validate_config(bad); }) == ErrorCode::config);

  bad.lambda3 = 0.9;
  bad.steps = 1;
  auto v = config_violations(bad);
  CHECK(v.size() == 3);
  try {
    validate_config(bad);
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("frames") != std::string::npos);
    CHECK(msg.find("steps") != std::string::npos);
    CHECK(msg.find("lambda3") != std::string::npos);
  }
}

TEST_CASE("config key/value surface") {
  MorphConfig cfg;
  set_config_value(cfg, "frames", "3");
  set_config_value(cfg, "transform", "dct");
  set_config_value(cfg, "noise_band", "low");
  set_config_value(cfg, "lambda2", "0.75");
  CHECK(cfg.frames == 3);
  CHECK(cfg.transform == SpectralTransform::dct);
  CHECK(cfg.noise_band == NoiseBand::low);
  CHECK(get_config_value(cfg, "lambda2") == "0.75");
  CHECK(code_of([&] { set_config_value(cfg, "bogus", "1"); }) == ErrorCode::config);
  CHECK(code_of([&] { set_config_value(cfg, "frames", "three"); }) == ErrorCode::config);
  CHECK(code_of([&] { set_config_value(cfg, "transform", "wavelet"); }) == ErrorCode::config);

  MorphConfig back = parse_config(format_config(cfg));
  CHECK(back == cfg);

  MorphConfig from_text = parse_config("# comment\n\nframes = 7\nconditioning = \"left\"\n");
  CHECK(from_text.frames == 7);
  CHECK(from_text.conditioning == FrameConditioning::left);
  CHECK(code_of([] { parse_config("nonsense line"); }) == ErrorCode::config);

  // a run manifest contributes only its config.* keys
  MorphConfig from_manifest = parse_config("schema=1\nvariant=full\nconfig.frames=4\nconfig.seed=9\n");
  CHECK(from_manifest.frames == 4);
  CHECK(from_manifest.seed == 9);
}

TEST_CASE("tensor helpers") {
  Tensor a = testutil::random_tensor({2, 3, 4}, 1);
  Tensor b = testutil::random_tensor({2, 3, 4}, 2);
  CHECK(a.size() == 24);
  CHECK(l2_distance(a, a) == 0.0);
  CHECK(relative_l2(a, a) == 0.0);
  Tensor c = linear_combination(2.0, a, -1.0, b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(c[i] == doctest::Approx(2.0 * a[i] - b[i]));
  CHECK(checksum(a.values()) != checksum(b.values()));
  CHECK(checksum(a.values()) == checksum(Tensor(a).values()));
  CHECK(code_of([&] { require_same_shape(a, Tensor({3, 2, 4}), "test"); }) == ErrorCode::shape_mismatch);
  Tensor nan({2}, 0.0f);
  nan[1] = std::nanf("");
  CHECK_FALSE(all_finite(nan));
}

TEST_CASE("latent bundle consistency") {
  LatentBundle b;
  b.left = {Tensor({1, 2, 2}), LatentRole::left(), 0};
  b.right = {Tensor({1, 2, 2}), LatentRole::right(), 0};
  b.intermediates = {{Tensor({1, 2, 2}), LatentRole::intermediate(1), 0}};
  CHECK_NOTHROW(b.check_consistent());
  CHECK(b.member_count() == 3);
  CHECK(b.frame(0).role == LatentRole::left());
  CHECK(b.frame(1).role == LatentRole::intermediate(1));
  CHECK(b.frame(2).role == LatentRole::right());
  b.set_timestep(4);
  CHECK(b.frame(1).timestep == 4);
  b.intermediates[0].timestep = 3;
  CHECK_THROWS_AS(b.check_consistent(), Error);
  b.set_timestep(0);
  b.intermediates[0].data = Tensor({1, 2, 3});
  CHECK_THROWS_AS(b.check_consistent(), Error);
  CHECK(LatentRole::intermediate(2).name() == "frame2");
}
