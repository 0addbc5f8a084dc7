#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "fake_model.hpp"
#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/pretrained_adapter.hpp"
#include "morphkit/toy_backend.hpp"
#include "test_helpers.hpp"

using namespace morphkit;
namespace fs = std::filesystem;

namespace {

struct CountingHook : AttentionHook {
  std::vector<std::string> seen;
  Tensor on_self_attention(const AttentionSite& s) override {
    seen.push_back(s.layer_id);
    return attention(s.q, s.k, s.v);
  }
};

// Same checks for every backend.
void conformance(const Backend& b) {
  Image img = testutil::smooth_image(b.image_width(), b.image_height(), 0);
  Tensor z = b.encode(img);
  CHECK(z.shape() == b.latent_shape());
  CHECK(rms_diff(b.decode(z), img) <= b.roundtrip_tolerance());
  CHECK(b.encode(img) == z);

  TextEmbedding text = b.embed_text("a small house");
  CHECK(b.embed_text("a small house").data == text.data);
  CountingHook h1, h2;
  Tensor e1 = b.predict_noise(z, 10, text, &h1, LatentRole::left());
  Tensor e2 = b.predict_noise(z, 10, text, &h2, LatentRole::left());
  CHECK(e1.shape() == z.shape());
  CHECK(e1 == e2);
  CHECK(all_finite(e1));
  CHECK_FALSE(h1.seen.empty());
  CHECK(h1.seen == h2.seen);
  CHECK(h1.seen == b.self_attention_layers());
  CHECK(std::set<std::string>(h1.seen.begin(), h1.seen.end()).size() == h1.seen.size());
  CHECK(b.predict_noise(z, 10, text, nullptr, LatentRole::left()) == e1);
  CHECK(int(b.schedule().alpha_bar.size()) == b.schedule().total_steps + 1);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("morphkit_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("toy backend conformance") {
  ToyBackend toy(0, 50);
  CHECK(toy.latent_shape() == Shape{4, 16, 16});
  CHECK(toy.image_width() == 128);
  conformance(toy);
  CHECK(toy.self_attention_layers().size() == 2);
}

TEST_CASE("toy output matches the frozen golden file") {
  std::ifstream in(std::string(MORPHKIT_TEST_DATA) + "/toy_zero_eps.txt");
  REQUIRE(in);
  std::vector<float> golden;
  for (float v; in >> v;) golden.push_back(v);
  ToyBackend toy(0, 50);
  TextEmbedding zero;
  zero.data = Tensor({ToyBackend::kTextTokens, ToyBackend::kTextDim});
  Tensor out = toy.predict_noise(Tensor(toy.latent_shape()), 25, zero, nullptr, LatentRole::left());
  REQUIRE(golden.size() == out.size());
  double worst = 0;
  for (std::size_t i = 0; i < golden.size(); ++i) worst = std::max(worst, double(std::abs(golden[i] - out[i])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("toy weights depend only on the seed") {
  ToyBackend a(7, 50), b(7, 50), c(8, 50);
  Tensor z = testutil::random_tensor(a.latent_shape(), 1);
  TextEmbedding t = a.embed_text("fox");
  CHECK(a.predict_noise(z, 20, t, nullptr, LatentRole::left()) == b.predict_noise(z, 20, t, nullptr, LatentRole::left()));
  CHECK(a.predict_noise(z, 20, t, nullptr, LatentRole::left()) != c.predict_noise(z, 20, t, nullptr, LatentRole::left()));
  CHECK(a.embed_text("fox").data != a.embed_text("cat").data);
  CHECK(a.unconditional_embedding().data == a.embed_text("").data);
}

TEST_CASE("toy output is bounded on unit-norm probes") {
  ToyBackend toy(0, 50);
  TextEmbedding text = toy.embed_text("probe");
  for (int t : {1, 2, 5, 10, 25, 40, 50})
    for (std::uint64_t s = 0; s < 6; ++s) {
      Tensor z = testutil::random_tensor(toy.latent_shape(), 500 + s);
      z = scaled(z, 1.0 / l2_norm(z));
      CHECK(l2_norm(toy.predict_noise(z, t, text, nullptr, LatentRole::left())) <= 10.0);
    }
}

TEST_CASE("hook exceptions propagate") {
  struct Throwing : AttentionHook {
    Tensor on_self_attention(const AttentionSite&) override { throw Error(ErrorCode::cache_miss, "boom"); }
  } hook;
  ToyBackend toy(0, 10);
  CHECK_THROWS_AS(toy.predict_noise(Tensor(toy.latent_shape()), 3, toy.embed_text("a"), &hook, LatentRole::left()), Error);
}

TEST_CASE("self-attention layer discovery for the SD 2.1 layout") {
  TempDir dir("layers");
  testutil::write_fake_model(dir.path);
  std::ifstream in(dir.path / "unet" / "config.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto layers = discover_self_attention_layers(text);
  CHECK(layers.size() == 16);
  CHECK(layers.front() == "down_blocks.0.attentions.0.transformer_blocks.0.attn1");
  CHECK(std::find(layers.begin(), layers.end(), "mid_block.attentions.0.transformer_blocks.0.attn1") != layers.end());
  CHECK(layers.back() == "up_blocks.3.attentions.2.transformer_blocks.0.attn1");

  PretrainedModelInfo info = inspect_model_dir(dir.path.string());
  CHECK(info.self_attention_layers == layers);
  CHECK(info.vae_scale_factor == 8);
  CHECK(info.beta_spec.kind == BetaKind::scaled_linear);

  auto deeper = discover_self_attention_layers(
      R"({"layers_per_block": 1, "transformer_layers_per_block": 2, "down_block_types": ["CrossAttnDownBlock2D"],
          "mid_block_type": "UNetMidBlock2DCrossAttn", "up_block_types": ["CrossAttnUpBlock2D"]})");
  CHECK(deeper.size() == 2 + 2 + 4);
}

TEST_CASE("missing weights are reported as unavailable") {
  AdapterStatus st = probe_pretrained("/nonexistent/model/dir");
  CHECK_FALSE(st.available);
  CHECK_FALSE(st.message.empty());
  try {
    open_pretrained("/nonexistent/model/dir");
    FAIL("expected unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unavailable);
  }

  TempDir dir("partial");
  testutil::write_fake_model(dir.path);
  fs::remove(dir.path / "unet" / "config.json");
  try {
    inspect_model_dir(dir.path.string());
    FAIL("expected unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unavailable);
    CHECK(std::string(e.what()).find("config.json") != std::string::npos);
  }
}

TEST_CASE("adapter over a registered runtime") {
  TempDir dir("adapter");
  testutil::write_fake_model(dir.path, 16);
  register_pretrained_runtime(nullptr);
  AdapterStatus st = probe_pretrained(dir.path.string());
  CHECK_FALSE(st.available);
  CHECK(st.info.has_value());
  CHECK_THROWS_AS(open_pretrained(dir.path.string()), Error);

  register_pretrained_runtime([](const PretrainedModelInfo& info) { return std::make_unique<testutil::FakeRuntime>(info); });
  auto backend = open_pretrained(dir.path.string(), 10);
  CHECK(backend->name() == "pretrained");
  CHECK(backend->latent_shape() == Shape{4, 16, 16});
  CHECK(backend->self_attention_layers().size() == 16);
  conformance(*backend);

  // environment override
  setenv("MORPHKIT_MODEL_DIR", dir.path.string().c_str(), 1);
  CHECK(resolve_model_dir("") == dir.path.string());
  CHECK(probe_pretrained("").available);
  unsetenv("MORPHKIT_MODEL_DIR");

  // a hook mounted on a layer the runtime never calls is named in the error
  struct SkippingRuntime : testutil::FakeRuntime {
    using FakeRuntime::FakeRuntime;
    Tensor unet(const Tensor& latent, int, const Tensor&, const std::function<Tensor(const AttentionSite&)>&) override {
      return latent;
    }
  };
  register_pretrained_runtime([](const PretrainedModelInfo& info) { return std::make_unique<SkippingRuntime>(info); });
  auto broken = open_pretrained(dir.path.string(), 10);
  try {
    broken->predict_noise(Tensor(broken->latent_shape()), 3, broken->embed_text("x"), nullptr, LatentRole::left());
    FAIL("expected backend error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::backend);
    CHECK(std::string(e.what()).find("down_blocks.0.attentions.0") != std::string::npos);
  }
  register_pretrained_runtime(nullptr);
}
