#include "morphkit/diffusion.hpp"

#include <string>

#include "morphkit/error.hpp"

namespace morphkit {

const TextEmbedding& FrameEmbeddings::for_role(const LatentRole& role) const {
  switch (role.kind) {
    case LatentRole::Kind::left: return left;
    case LatentRole::Kind::right: return right;
    case LatentRole::Kind::intermediate:
      return intermediates.at(static_cast<std::size_t>(role.index - 1));
  }
  return left;
}

namespace {

using Kind = InterventionKind::Kind;

struct StepRequest {
  Phase phase;
  int step;       // zero-based counter within the phase
  int eval_time;  // DDIM timestep the prediction is made at
  Branch branch;
  Kind kind;
};

// Noise predictions for every bundle member (frame order) at one step and
// guidance branch. Endpoints run original attention and publish their K/V;
// for prior-driven steps the intermediates first publish theirs in a
// collection pass with original attention.
std::vector<Tensor> predict_members(const LatentBundle& bundle, const StepRequest& req,
                                    const DiffusionOptions& opts, const FrameEmbeddings& emb,
                                    KVCache& cache, StageLog* log) {
  const Backend& backend = *opts.backend;
  const int frames = static_cast<int>(bundle.intermediates.size());
  auto text_for = [&](const LatentRole& role) -> const TextEmbedding& {
    return req.branch == Branch::unconditional ? emb.unconditional : emb.for_role(role);
  };
  auto context = [&](InterventionKind kind, bool record) {
    return AttentionDispatcher::Context{req.phase, req.step, req.branch, kind, frames, record};
  };

  std::size_t predictions = 0;
  std::size_t reads = 0;
  std::vector<Tensor> eps(bundle.member_count());
  for (std::size_t pos : {std::size_t{0}, bundle.member_count() - 1}) {
    const Latent& m = bundle.frame(pos);
    AttentionDispatcher d(cache, context(InterventionKind::original(), true));
    eps[pos] = backend.predict_noise(m.data, req.eval_time, text_for(m.role), &d, m.role);
    ++predictions;
  }

  const bool collect = req.kind == Kind::prior_driven;
  if (collect) {
    for (const Latent& m : bundle.intermediates) {
      AttentionDispatcher d(cache, context(InterventionKind::original(), true));
      backend.predict_noise(m.data, req.eval_time, text_for(m.role), &d, m.role);
      ++predictions;
    }
  }

  for (const Latent& m : bundle.intermediates) {
    InterventionKind kind{req.kind, 0.0};
    if (req.kind == Kind::step_oriented) kind.alpha = alpha_for_frame(m.role.index, frames);
    AttentionDispatcher d(cache, context(kind, !collect));
    eps[static_cast<std::size_t>(m.role.index)] =
        backend.predict_noise(m.data, req.eval_time, text_for(m.role), &d, m.role);
    reads += d.cache_reads();
    ++predictions;
  }

  if (log) {
    log->predictions += predictions;
    (req.phase == Phase::forward ? log->forward_cache_reads : log->reverse_cache_reads) += reads;
  }
  return eps;
}

std::vector<Tensor> guided_predictions(const LatentBundle& bundle, StepRequest req, double scale,
                                       const DiffusionOptions& opts, const FrameEmbeddings& emb,
                                       KVCache& cache, StageLog* log) {
  req.branch = Branch::conditional;
  std::vector<Tensor> cond = predict_members(bundle, req, opts, emb, cache, log);
  if (scale == 1.0) return cond;
  req.branch = Branch::unconditional;
  std::vector<Tensor> uncond = predict_members(bundle, req, opts, emb, cache, log);
  for (std::size_t i = 0; i < cond.size(); ++i)
    cond[i] = cfg_combine({uncond[i], TextEmbedding::Source::unconditional},
                          {cond[i], TextEmbedding::Source::other}, scale)
                  .eps;
  return cond;
}

void check_options(const DiffusionOptions& opts, const LatentBundle& bundle) {
  if (!opts.backend) throw Error(ErrorCode::invalid_argument, "no backend");
  validate_config(opts.config);
  const NoiseSchedule& sched = opts.backend->schedule();
  if (sched.total_steps != opts.config.steps || opts.plan.steps != opts.config.steps) {
    throw Error(ErrorCode::config, "backend schedule has " + std::to_string(sched.total_steps) +
                                       " steps, config asks for " +
                                       std::to_string(opts.config.steps));
  }
  if (static_cast<int>(bundle.intermediates.size()) != opts.config.frames) {
    throw Error(ErrorCode::config, "bundle carries " + std::to_string(bundle.intermediates.size()) +
                                       " intermediates, config asks for " +
                                       std::to_string(opts.config.frames));
  }
  bundle.check_consistent();
}

std::vector<Trajectory> start_trajectories(const LatentBundle& bundle, Trajectory::Direction dir,
                                           bool record) {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < bundle.member_count(); ++i) {
    Trajectory tr;
    tr.direction = dir;
    tr.role = bundle.frame(i).role;
    if (record) tr.states.push_back(bundle.frame(i));
    out.push_back(std::move(tr));
  }
  return out;
}

void advance(LatentBundle& bundle, const std::vector<Tensor>& eps, int from, int to,
             const NoiseSchedule& sched, std::vector<Trajectory>& trajectories, bool record) {
  for (std::size_t i = 0; i < bundle.member_count(); ++i) {
    Latent& m = bundle.frame(i);
    m.data = to > from ? ddim_forward_step(m.data, eps[i], to, sched)
                       : ddim_reverse_step(m.data, eps[i], from, sched);
    if (!all_finite(m.data))
      throw Error(ErrorCode::backend, "non-finite latent for " + m.role.name());
  }
  bundle.set_timestep(to);
  if (record)
    for (std::size_t i = 0; i < bundle.member_count(); ++i) trajectories[i].states.push_back(bundle.frame(i));
}

}  // namespace

std::vector<Trajectory> invert(LatentBundle& bundle, const DiffusionOptions& opts,
                               const FrameEmbeddings& embeddings, StageLog* log) {
  check_options(opts, bundle);
  if (bundle.timestep != 0)
    throw Error(ErrorCode::invalid_argument, "inversion starts from timestep 0");
  const NoiseSchedule& sched = opts.backend->schedule();
  const int steps = sched.total_steps;
  auto trajectories =
      start_trajectories(bundle, Trajectory::Direction::forward_diffusion, opts.record_trajectories);
  KVCache cache;
  for (int s = 0; s < steps; ++s) {
    const Kind kind = effective_stage(s, Phase::forward, opts.plan, opts.ablation);
    if (log) log->forward.push_back(kind);
    try {
      StepRequest req{Phase::forward, s, s, Branch::conditional, kind};
      auto eps = guided_predictions(bundle, req, opts.config.inversion_cfg_scale, opts, embeddings,
                                    cache, log);
      advance(bundle, eps, s, s + 1, sched, trajectories, opts.record_trajectories);
    } catch (const Error& e) {
      throw e.with_context("forward step " + std::to_string(s));
    }
    cache.evict_step(Phase::forward, s);
  }
  return trajectories;
}

std::vector<Trajectory> denoise(LatentBundle& bundle, const DiffusionOptions& opts,
                                const FrameEmbeddings& embeddings, StageLog* log) {
  check_options(opts, bundle);
  const NoiseSchedule& sched = opts.backend->schedule();
  const int steps = sched.total_steps;
  if (bundle.timestep != steps)
    throw Error(ErrorCode::invalid_argument, "denoising starts from timestep T");
  auto trajectories =
      start_trajectories(bundle, Trajectory::Direction::reverse_denoising, opts.record_trajectories);
  KVCache cache;
  for (int s = 0; s < steps; ++s) {
    const int t = steps - s;
    const Kind kind = effective_stage(s, Phase::reverse, opts.plan, opts.ablation);
    if (log) log->reverse.push_back(kind);
    try {
      StepRequest req{Phase::reverse, s, t, Branch::conditional, kind};
      auto eps = guided_predictions(bundle, req, opts.config.cfg_scale, opts, embeddings, cache, log);
      advance(bundle, eps, t, t - 1, sched, trajectories, opts.record_trajectories);
    } catch (const Error& e) {
      throw e.with_context("reverse step " + std::to_string(s));
    }
    cache.evict_step(Phase::reverse, s);
  }
  return trajectories;
}

}  // namespace morphkit
