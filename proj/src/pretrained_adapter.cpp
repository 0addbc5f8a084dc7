#include "morphkit/pretrained_adapter.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "morphkit/error.hpp"

namespace morphkit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex g_runtime_mutex;
RuntimeFactory g_runtime;

constexpr const char* kHint =
    "set MORPHKIT_MODEL_DIR or pass a model path to a diffusers-format Stable Diffusion 2.1 "
    "directory, or use --backend toy";

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::unavailable, "missing model file '" + p.string() + "'; " + kHint);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::unavailable, "unreadable model file '" + p.string() + "': " + e.what());
  }
}

int transformer_depth(const json& unet, std::size_t block) {
  auto it = unet.find("transformer_layers_per_block");
  if (it == unet.end() || it->is_null()) return 1;
  if (it->is_number_integer()) return it->get<int>();
  if (it->is_array() && block < it->size()) {
    const json& v = (*it)[block];
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_array() && !v.empty()) return v[0].get<int>();
  }
  return 1;
}

bool has_attention(const std::string& block_type) {
  return block_type.find("CrossAttn") != std::string::npos ||
         block_type.find("AttnDownBlock") != std::string::npos ||
         block_type.find("AttnUpBlock") != std::string::npos;
}

class PretrainedBackend : public Backend {
 public:
  PretrainedBackend(PretrainedModelInfo info, std::unique_ptr<PretrainedRuntime> runtime, int steps)
      : info_(std::move(info)), runtime_(std::move(runtime)),
        schedule_(build_schedule(steps, info_.beta_spec)) {}

  std::string name() const override { return "pretrained"; }
  int image_width() const override { return info_.sample_size * info_.vae_scale_factor; }
  int image_height() const override { return image_width(); }
  Shape latent_shape() const override {
    return {static_cast<std::size_t>(info_.latent_channels), static_cast<std::size_t>(info_.sample_size),
            static_cast<std::size_t>(info_.sample_size)};
  }
  const NoiseSchedule& schedule() const override { return schedule_; }
  double roundtrip_tolerance() const override { return 0.08; }

  Tensor encode(const Image& image) const override { return runtime_->encode(image); }
  Image decode(const Tensor& latent) const override { return runtime_->decode(latent); }
  TextEmbedding embed_text(const std::string& prompt) const override {
    TextEmbedding e;
    e.data = runtime_->embed_text(prompt);
    return e;
  }

  Tensor predict_noise(const Tensor& latent, int t, const TextEmbedding& text, AttentionHook* hook,
                       const LatentRole& owner) const override {
    std::map<std::string, int> calls;
    for (const auto& l : info_.self_attention_layers) calls[l] = 0;
    auto site_fn = [&](const AttentionSite& s) -> Tensor {
      auto it = calls.find(s.layer_id);
      if (it == calls.end())
        throw Error(ErrorCode::backend, "runtime reported unknown self-attention layer '" + s.layer_id + "'");
      ++it->second;
      AttentionSite site = s;
      site.timestep = t;
      site.owner = owner;
      return hook ? hook->on_self_attention(site) : attention(site.q, site.k, site.v);
    };
    Tensor out = runtime_->unet(latent, schedule_.train_timestep.at(static_cast<std::size_t>(t)),
                                text.data, site_fn);
    for (const auto& [layer, n] : calls)
      if (n != 1)
        throw Error(ErrorCode::backend, "attention hook on layer '" + layer + "' ran " +
                                            std::to_string(n) + " times (expected once)");
    return out;
  }

  std::vector<std::string> self_attention_layers() const override {
    return info_.self_attention_layers;
  }

 private:
  PretrainedModelInfo info_;
  std::unique_ptr<PretrainedRuntime> runtime_;
  NoiseSchedule schedule_;
};

}  // namespace

void register_pretrained_runtime(RuntimeFactory factory) {
  std::lock_guard lock(g_runtime_mutex);
  g_runtime = std::move(factory);
}

std::string resolve_model_dir(const std::string& model_ref) {
  const char* env = std::getenv("MORPHKIT_MODEL_DIR");
  std::string cache = env ? env : "";
  if (model_ref.empty()) return cache;
  if (fs::is_directory(model_ref) || cache.empty()) return model_ref;
  // registry id such as "stabilityai/stable-diffusion-2-1" under the cache
  fs::path under = fs::path(cache) / model_ref;
  return fs::is_directory(under) ? under.string() : model_ref;
}

std::vector<std::string> discover_self_attention_layers(const std::string& unet_config_json) {
  json unet;
  try {
    unet = json::parse(unet_config_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::unavailable, std::string("UNet config is not valid JSON: ") + e.what());
  }
  const int per_block = unet.value("layers_per_block", 2);
  std::vector<std::string> layers;
  auto add = [&](const std::string& prefix, int attentions, int depth) {
    for (int a = 0; a < attentions; ++a)
      for (int b = 0; b < depth; ++b)
        layers.push_back(prefix + ".attentions." + std::to_string(a) + ".transformer_blocks." +
                         std::to_string(b) + ".attn1");
  };

  const auto down = unet.value("down_block_types", std::vector<std::string>{});
  for (std::size_t i = 0; i < down.size(); ++i)
    if (has_attention(down[i]))
      add("down_blocks." + std::to_string(i), per_block, transformer_depth(unet, i));

  const std::string mid = unet.value("mid_block_type", std::string("UNetMidBlock2DCrossAttn"));
  if (mid.find("Attn") != std::string::npos)
    add("mid_block", 1, transformer_depth(unet, down.empty() ? 0 : down.size() - 1));

  const auto up = unet.value("up_block_types", std::vector<std::string>{});
  for (std::size_t i = 0; i < up.size(); ++i)
    if (has_attention(up[i]))
      add("up_blocks." + std::to_string(i), per_block + 1,
          transformer_depth(unet, up.size() - 1 - i));

  if (layers.empty()) throw Error(ErrorCode::unavailable, "UNet config declares no self-attention layers");
  return layers;
}

PretrainedModelInfo inspect_model_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::unavailable, std::string("no pretrained model configured; ") + kHint);
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::unavailable, "model directory '" + dir + "' not found; " + kHint);
  const fs::path root(dir);
  read_json(root / "model_index.json");
  json sched = read_json(root / "scheduler" / "scheduler_config.json");
  std::ifstream unet_in(root / "unet" / "config.json");
  if (!unet_in) throw Error(ErrorCode::unavailable, "missing '" + (root / "unet" / "config.json").string() + "'; " + kHint);
  std::stringstream unet_text;
  unet_text << unet_in.rdbuf();
  json unet = json::parse(unet_text.str(), nullptr, false);
  json vae = read_json(root / "vae" / "config.json");

  PretrainedModelInfo info;
  info.root = dir;
  const std::string kind = sched.value("beta_schedule", std::string("scaled_linear"));
  if (kind == "linear") info.beta_spec.kind = BetaKind::linear;
  else if (kind == "scaled_linear") info.beta_spec.kind = BetaKind::scaled_linear;
  else throw Error(ErrorCode::unavailable, "unsupported beta_schedule '" + kind + "'");
  info.beta_spec.beta_min = sched.value("beta_start", 0.00085);
  info.beta_spec.beta_max = sched.value("beta_end", 0.012);
  info.beta_spec.train_steps = sched.value("num_train_timesteps", 1000);
  if (!unet.is_discarded()) {
    info.sample_size = unet.value("sample_size", 96);
    info.latent_channels = unet.value("in_channels", 4);
  }
  const auto blocks = vae.value("block_out_channels", std::vector<int>{128, 256, 512, 512});
  info.vae_scale_factor = 1 << (blocks.empty() ? 0 : blocks.size() - 1);
  info.self_attention_layers = discover_self_attention_layers(unet_text.str());
  return info;
}

AdapterStatus probe_pretrained(const std::string& model_ref) {
  AdapterStatus st;
  try {
    st.info = inspect_model_dir(resolve_model_dir(model_ref));
    std::lock_guard lock(g_runtime_mutex);
    st.available = static_cast<bool>(g_runtime);
    st.message = st.available ? "ok" : "model found but no pretrained runtime is linked into this build";
  } catch (const Error& e) {
    st.available = false;
    st.message = e.what();
  }
  return st;
}

std::unique_ptr<Backend> open_pretrained(const std::string& model_ref, int steps) {
  PretrainedModelInfo info = inspect_model_dir(resolve_model_dir(model_ref));
  RuntimeFactory factory;
  {
    std::lock_guard lock(g_runtime_mutex);
    factory = g_runtime;
  }
  if (!factory)
    throw Error(ErrorCode::unavailable,
                "model found at '" + info.root +
                    "' but no pretrained runtime is linked into this build; use --backend toy");
  auto runtime = factory(info);
  if (!runtime) throw Error(ErrorCode::unavailable, "pretrained runtime failed to load '" + info.root + "'");
  return std::make_unique<PretrainedBackend>(std::move(info), std::move(runtime), steps);
}

}  // namespace morphkit
