#include "morphkit/ddim.hpp"

#include <cmath>
#include <string>

#include "morphkit/error.hpp"

namespace morphkit {
namespace {

void check_step(int t, const NoiseSchedule& sched, const char* op) {
  if (t < 1 || t > sched.total_steps) {
    throw Error(ErrorCode::out_of_range, std::string(op) + ": timestep " + std::to_string(t) +
                                             " outside [1, " + std::to_string(sched.total_steps) +
                                             "]");
  }
}

}  // namespace

Tensor ddim_reverse_step(const Tensor& x_t, const Tensor& eps, int t, const NoiseSchedule& sched) {
  check_step(t, sched, "ddim_reverse_step");
  require_same_shape(x_t, eps, "ddim_reverse_step");
  const double ab_t = sched.alpha_bar_at(t);
  const double ab_prev = sched.alpha_bar_at(t - 1);
  // x_{t-1} = sqrt(ab_prev) (x_t - sqrt(1 - ab_t) eps) / sqrt(ab_t) + sqrt(1 - ab_prev) eps
  const double cx = std::sqrt(ab_prev / ab_t);
  const double ce = std::sqrt(1.0 - ab_prev) - std::sqrt(ab_prev) * std::sqrt(1.0 - ab_t) / std::sqrt(ab_t);
  return linear_combination(cx, x_t, ce, eps);
}

Tensor ddim_forward_step(const Tensor& x_prev, const Tensor& eps, int t,
                         const NoiseSchedule& sched) {
  check_step(t, sched, "ddim_forward_step");
  require_same_shape(x_prev, eps, "ddim_forward_step");
  const double ab_t = sched.alpha_bar_at(t);
  const double ab_prev = sched.alpha_bar_at(t - 1);
  // Cumulative signal levels throughout; this is the exact inverse of the
  // reverse step above.
  const double cx = std::sqrt(ab_t / ab_prev);
  const double ce = std::sqrt(ab_t) * (std::sqrt(1.0 / ab_t - 1.0) - std::sqrt(1.0 / ab_prev - 1.0));
  return linear_combination(cx, x_prev, ce, eps);
}

NoisePrediction cfg_combine(const NoisePrediction& uncond, const NoisePrediction& cond,
                            double scale) {
  require_same_shape(uncond.eps, cond.eps, "cfg_combine");
  NoisePrediction out;
  out.conditioned_on = cond.conditioned_on;
  if (scale == 1.0) {
    out.eps = cond.eps;
  } else if (scale == 0.0) {
    out.eps = uncond.eps;
  } else {
    out.eps = Tensor(cond.eps.shape());
    for (std::size_t i = 0; i < out.eps.size(); ++i) {
      double u = uncond.eps[i];
      out.eps[i] = static_cast<float>(u + scale * (double(cond.eps[i]) - u));
    }
  }
  return out;
}

}  // namespace morphkit
