#include "morphkit/attention.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "morphkit/error.hpp"

namespace morphkit {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

struct Dims {
  std::size_t heads, tq, tk, dk, dv;
};

Dims check_dims(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3)
    throw Error(ErrorCode::shape_mismatch, "attention expects (heads, tokens, d_k) tensors");
  if (q.dim(0) != k.dim(0) || k.dim(0) != v.dim(0))
    throw Error(ErrorCode::shape_mismatch, "attention head counts differ: " + shape_string(q.shape()) +
                                               " " + shape_string(k.shape()) + " " +
                                               shape_string(v.shape()));
  if (q.dim(2) != k.dim(2))
    throw Error(ErrorCode::shape_mismatch, "query/key widths differ: " + shape_string(q.shape()) +
                                               " vs " + shape_string(k.shape()));
  if (k.dim(1) != v.dim(1))
    throw Error(ErrorCode::shape_mismatch, "key/value token counts differ: " +
                                               shape_string(k.shape()) + " vs " +
                                               shape_string(v.shape()));
  return {q.dim(0), q.dim(1), k.dim(1), q.dim(2), v.dim(2)};
}

// Row softmax of Q K^T / sqrt(d_k) for one head, in place.
void softmax_scores(const float* q, const float* k, const Dims& d, RowMatrix& scores) {
  ConstMap qm(q, static_cast<Eigen::Index>(d.tq), static_cast<Eigen::Index>(d.dk));
  ConstMap km(k, static_cast<Eigen::Index>(d.tk), static_cast<Eigen::Index>(d.dk));
  const float scale = 1.0f / std::sqrt(static_cast<float>(d.dk));
  scores.noalias() = (qm * km.transpose()) * scale;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    float m = row.maxCoeff();
    row = (row.array() - m).exp();
    row /= row.sum();
  }
}

void check_compatible(const Tensor& q, const KeyValue& kv) { check_dims(q, kv.k, kv.v); }

}  // namespace

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  Dims d = check_dims(q, k, v);
  Tensor out({d.heads, d.tq, d.dv});
  RowMatrix scores(d.tq, d.tk);
  for (std::size_t h = 0; h < d.heads; ++h) {
    softmax_scores(q.data() + h * d.tq * d.dk, k.data() + h * d.tk * d.dk, d, scores);
    ConstMap vm(v.data() + h * d.tk * d.dv, static_cast<Eigen::Index>(d.tk),
                static_cast<Eigen::Index>(d.dv));
    Map om(out.data() + h * d.tq * d.dv, static_cast<Eigen::Index>(d.tq),
           static_cast<Eigen::Index>(d.dv));
    om.noalias() = scores * vm;
  }
  return out;
}

Tensor attention_weights(const Tensor& q, const Tensor& k) {
  Dims d = check_dims(q, k, k);
  Tensor out({d.heads, d.tq, d.tk});
  RowMatrix scores(d.tq, d.tk);
  for (std::size_t h = 0; h < d.heads; ++h) {
    softmax_scores(q.data() + h * d.tq * d.dk, k.data() + h * d.tk * d.dk, d, scores);
    Map(out.data() + h * d.tq * d.tk, static_cast<Eigen::Index>(d.tq),
        static_cast<Eigen::Index>(d.tk)) = scores;
  }
  return out;
}

Tensor spherical_aggregation(const Tensor& q, const KeyValue& left, const KeyValue& right) {
  return step_oriented(q, left, right, 0.5);
}

Tensor prior_driven(const Tensor& q, std::span<const KeyValue> frames) {
  if (frames.empty())
    throw Error(ErrorCode::invalid_argument, "prior-driven attention needs at least one frame");
  for (const auto& kv : frames) check_compatible(q, kv);
  if (frames.size() == 1) return attention(q, frames[0].k, frames[0].v);
  std::vector<double> acc;
  Shape shape;
  for (const auto& kv : frames) {
    Tensor o = attention(q, kv.k, kv.v);
    if (acc.empty()) {
      acc.assign(o.size(), 0.0);
      shape = o.shape();
    }
    for (std::size_t i = 0; i < o.size(); ++i) acc[i] += o[i];
  }
  Tensor out(shape);
  const double inv = 1.0 / double(frames.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

Tensor step_oriented(const Tensor& q, const KeyValue& left, const KeyValue& right, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::out_of_range, "step-oriented weight must lie in [0, 1], got " +
                                             std::to_string(alpha));
  check_compatible(q, left);
  check_compatible(q, right);
  if (alpha == 0.0) return attention(q, left.k, left.v);
  if (alpha == 1.0) return attention(q, right.k, right.v);
  Tensor a = attention(q, left.k, left.v);
  Tensor b = attention(q, right.k, right.v);
  require_same_shape(a, b, "step_oriented");
  return linear_combination(1.0 - alpha, a, alpha, b);
}

double alpha_for_frame(int frame, int frames) {
  if (frames < 1 || frame < 1 || frame > frames)
    throw Error(ErrorCode::out_of_range, "frame " + std::to_string(frame) + " outside [1, " +
                                             std::to_string(frames) + "]");
  return double(frame) / double(frames + 1);
}

const char* to_string(InterventionKind::Kind kind) {
  switch (kind) {
    case InterventionKind::Kind::original: return "original";
    case InterventionKind::Kind::spherical_aggregation: return "spherical_aggregation";
    case InterventionKind::Kind::prior_driven: return "prior_driven";
    case InterventionKind::Kind::step_oriented: return "step_oriented";
  }
  return "?";
}

const char* to_string(Phase phase) { return phase == Phase::forward ? "forward" : "reverse"; }

std::string to_string(const CacheKey& key) {
  return std::string(to_string(key.phase)) + " step " + std::to_string(key.step) + ", layer " +
         key.layer_id + ", role " + key.role.name() +
         (key.branch == Branch::unconditional ? " (unconditional)" : "");
}

void KVCache::put(const CacheKey& key, KeyValue kv) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(kv));
  if (!inserted) throw Error(ErrorCode::invalid_argument, "duplicate cache write at " + to_string(key));
}

const KeyValue& KVCache::get(const CacheKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::cache_miss, "no cached K/V for " + to_string(key));
  return it->second;
}

bool KVCache::contains(const CacheKey& key) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(key);
}

std::size_t KVCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void KVCache::evict_step(Phase phase, int step) {
  std::lock_guard lock(mutex_);
  std::erase_if(entries_, [&](const auto& e) { return e.first.phase == phase && e.first.step == step; });
}

AttentionDispatcher::AttentionDispatcher(KVCache& cache, Context context)
    : cache_(cache), context_(context) {}

bool AttentionDispatcher::intervenes_on(const std::string& layer_id) const {
  if (layers_.empty()) return true;
  for (const auto& l : layers_)
    if (l == layer_id) return true;
  return false;
}

CacheKey AttentionDispatcher::key_for(const AttentionSite& site, LatentRole role) const {
  return CacheKey{context_.phase, context_.step, context_.branch, site.layer_id, role};
}

Tensor AttentionDispatcher::on_self_attention(const AttentionSite& site) {
  ++sites_seen_;
  if (context_.record) cache_.put(key_for(site, site.owner), KeyValue{site.k, site.v});

  using K = InterventionKind::Kind;
  const K kind = context_.kind.kind;
  if (site.owner.is_endpoint() || kind == K::original || !intervenes_on(site.layer_id))
    return attention(site.q, site.k, site.v);

  ++cache_reads_;
  switch (kind) {
    case K::spherical_aggregation:
      return spherical_aggregation(site.q, cache_.get(key_for(site, LatentRole::left())),
                                   cache_.get(key_for(site, LatentRole::right())));
    case K::step_oriented:
      return step_oriented(site.q, cache_.get(key_for(site, LatentRole::left())),
                           cache_.get(key_for(site, LatentRole::right())), context_.kind.alpha);
    case K::prior_driven: {
      std::vector<KeyValue> frames;
      frames.reserve(static_cast<std::size_t>(context_.frames));
      for (int j = 1; j <= context_.frames; ++j)
        frames.push_back(cache_.get(key_for(site, LatentRole::intermediate(j))));
      return prior_driven(site.q, frames);
    }
    case K::original: break;
  }
  return attention(site.q, site.k, site.v);
}

}  // namespace morphkit
