#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "morphkit/types.hpp"

namespace morphkit {

// Q, K, V are (heads, tokens, d_k) tensors, already projected and split.
struct AttentionSite {
  std::string layer_id;
  Tensor q;
  Tensor k;
  Tensor v;
  int timestep = 0;
  LatentRole owner;
};

// softmax(Q K^T / sqrt(d_k)) V per head, with row-max subtraction.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v);

// Softmax weights (heads, tokens_q, tokens_k); exposed for the
// row-stochasticity property.
Tensor attention_weights(const Tensor& q, const Tensor& k);

struct KeyValue {
  Tensor k;
  Tensor v;
};

// Mean of the attention outputs against the two endpoints' keys and values.
Tensor spherical_aggregation(const Tensor& q, const KeyValue& left, const KeyValue& right);

// Mean of the attention outputs against every intermediate frame's keys and
// values at the same step and layer.
Tensor prior_driven(const Tensor& q, std::span<const KeyValue> frames);

// (1 - alpha) * left-attention + alpha * right-attention.
Tensor step_oriented(const Tensor& q, const KeyValue& left, const KeyValue& right, double alpha);

// alpha_j = j / (J + 1) for frame j in 1..J.
double alpha_for_frame(int frame, int frames);

struct InterventionKind {
  enum class Kind { original, spherical_aggregation, prior_driven, step_oriented };

  Kind kind = Kind::original;
  double alpha = 0.0;  // step_oriented only

  static InterventionKind original() { return {Kind::original, 0.0}; }
  static InterventionKind spherical() { return {Kind::spherical_aggregation, 0.0}; }
  static InterventionKind prior() { return {Kind::prior_driven, 0.0}; }
  static InterventionKind step(double a) { return {Kind::step_oriented, a}; }

  friend bool operator==(const InterventionKind&, const InterventionKind&) = default;
};

const char* to_string(InterventionKind::Kind kind);

enum class Phase { forward, reverse };
// Classifier-free guidance branch a prediction belongs to.
enum class Branch { conditional, unconditional };

const char* to_string(Phase phase);

struct CacheKey {
  Phase phase = Phase::forward;
  int step = 0;
  Branch branch = Branch::conditional;
  std::string layer_id;
  LatentRole role;

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

std::string to_string(const CacheKey& key);

// Write-once store of per-site keys and values. Safe for concurrent writers
// on distinct keys; a duplicate write throws.
class KVCache {
 public:
  void put(const CacheKey& key, KeyValue kv);
  // Throws cache_miss naming (phase, step, layer, role).
  const KeyValue& get(const CacheKey& key) const;
  bool contains(const CacheKey& key) const;
  std::size_t size() const;
  // Drops every entry recorded for (phase, step).
  void evict_step(Phase phase, int step);

 private:
  mutable std::mutex mutex_;
  std::map<CacheKey, KeyValue> entries_;
};

// Callback every self-attention site inside a denoiser invokes exactly once
// per predict_noise call. Returns the (heads, tokens, d_k) attention output.
class AttentionHook {
 public:
  virtual ~AttentionHook() = default;
  virtual Tensor on_self_attention(const AttentionSite& site) = 0;
};

// Routes each self-attention site to the intervention selected for the
// current (phase, step, branch).
class AttentionDispatcher : public AttentionHook {
 public:
  struct Context {
    Phase phase = Phase::forward;
    int step = 0;
    Branch branch = Branch::conditional;
    InterventionKind kind;
    int frames = 1;     // J
    bool record = true; // write this site's K/V into the cache
  };

  AttentionDispatcher(KVCache& cache, Context context);

  Tensor on_self_attention(const AttentionSite& site) override;

  // Number of sites that were served from the cache.
  std::size_t cache_reads() const noexcept { return cache_reads_; }
  std::size_t sites_seen() const noexcept { return sites_seen_; }

  // Optional layer filter: interventions apply only to matching layer ids
  // (all layers when empty).
  void restrict_layers(std::vector<std::string> layer_ids) { layers_ = std::move(layer_ids); }

 private:
  bool intervenes_on(const std::string& layer_id) const;
  CacheKey key_for(const AttentionSite& site, LatentRole role) const;

  KVCache& cache_;
  Context context_;
  std::vector<std::string> layers_;
  std::size_t cache_reads_ = 0;
  std::size_t sites_seen_ = 0;
};

}  // namespace morphkit
