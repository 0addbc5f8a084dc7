#include "morphkit/slerp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "morphkit/error.hpp"

namespace morphkit {

double latent_angle(const Tensor& a, const Tensor& b) {
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

Tensor slerp(const Tensor& a, const Tensor& b, double t, double eps) {
  require_same_shape(a, b, "slerp");
  if (!(t >= 0.0 && t <= 1.0))
    throw Error(ErrorCode::out_of_range, "slerp fraction must lie in [0, 1]");
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 && nb == 0.0)
    throw Error(ErrorCode::degenerate_input, "slerp of two zero-norm latents");
  if (t == 0.0) return a;
  if (t == 1.0) return b;

  double phi = latent_angle(a, b);
  if (na == 0.0 || nb == 0.0 || phi < eps || std::numbers::pi - phi < eps)
    return linear_combination(1.0 - t, a, t, b);

  double s = std::sin(phi);
  return linear_combination(std::sin((1.0 - t) * phi) / s, a, std::sin(t * phi) / s, b);
}

InterpolationGrid interpolation_grid(const Latent& left, const Latent& right, int frames,
                                     double eps) {
  if (frames < 1) throw Error(ErrorCode::invalid_argument, "frame count must be >= 1");
  require_same_shape(left.data, right.data, "interpolation_grid");
  InterpolationGrid grid;
  grid.phi = latent_angle(left.data, right.data);
  for (int j = 1; j <= frames; ++j) {
    double t = double(j) / double(frames + 1);
    grid.fractions.push_back(t);
    grid.latents.push_back(
        Latent{slerp(left.data, right.data, t, eps), LatentRole::intermediate(j), left.timestep});
  }
  return grid;
}

TextEmbedding blend_text_embeddings(const TextEmbedding& left, const TextEmbedding& right,
                                    double alpha) {
  require_same_shape(left.data, right.data, "blend_text_embeddings");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::out_of_range, "embedding blend weight must lie in [0, 1]");
  TextEmbedding out;
  if (alpha == 0.0) out.data = left.data;
  else if (alpha == 1.0) out.data = right.data;
  else out.data = linear_combination(1.0 - alpha, left.data, alpha, right.data);
  out.source = TextEmbedding::Source::interpolated;
  out.alpha = alpha;
  return out;
}

}  // namespace morphkit
