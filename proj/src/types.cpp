#include "morphkit/types.hpp"

#include "morphkit/error.hpp"

namespace morphkit {

std::string LatentRole::name() const {
  switch (kind) {
    case Kind::left: return "left";
    case Kind::right: return "right";
    case Kind::intermediate: return "frame" + std::to_string(index);
  }
  return "?";
}

const Latent& LatentBundle::frame(std::size_t position) const {
  if (position == 0) return left;
  if (position == intermediates.size() + 1) return right;
  return intermediates.at(position - 1);
}

Latent& LatentBundle::frame(std::size_t position) {
  if (position == 0) return left;
  if (position == intermediates.size() + 1) return right;
  return intermediates.at(position - 1);
}

void LatentBundle::set_timestep(int t) {
  timestep = t;
  left.timestep = t;
  right.timestep = t;
  for (auto& m : intermediates) m.timestep = t;
}

void LatentBundle::check_consistent() const {
  for (std::size_t i = 0; i < member_count(); ++i) {
    const Latent& m = frame(i);
    if (m.timestep != timestep) {
      throw Error(ErrorCode::invalid_argument,
                  "bundle member " + m.role.name() + " at timestep " + std::to_string(m.timestep) +
                      ", bundle at " + std::to_string(timestep));
    }
    require_same_shape(m.data, left.data, "bundle member shape");
  }
}

std::string to_string(TextEmbedding::Source source) {
  switch (source) {
    case TextEmbedding::Source::left_prompt: return "left_prompt";
    case TextEmbedding::Source::right_prompt: return "right_prompt";
    case TextEmbedding::Source::interpolated: return "interpolated";
    case TextEmbedding::Source::unconditional: return "unconditional";
    case TextEmbedding::Source::other: return "other";
  }
  return "other";
}

}  // namespace morphkit
