#include "star/optimizer.hpp"

#include <cmath>

#include "star/error.hpp"

namespace star {

double lr_at(uint64_t step, uint64_t warmup_steps, uint64_t total_steps,
             double base_lr) {
  if (warmup_steps >= total_steps) {
    throw ConfigError("lr_at: warmup " + std::to_string(warmup_steps) +
                      " must be below total steps " +
                      std::to_string(total_steps));
  }
  if (step >= total_steps) return 0.0;
  if (step <= warmup_steps) {
    return warmup_steps == 0 ? base_lr
                             : base_lr * double(step) / double(warmup_steps);
  }
  return base_lr * double(total_steps - step) /
         double(total_steps - warmup_steps);
}

void adamw_step(std::span<double> params, std::span<const double> grads,
                AdamWState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw Error("adamw_step: shape mismatch (params " +
                std::to_string(params.size()) + ", grads " +
                std::to_string(grads.size()) + ", state " +
                std::to_string(state.first_moment.size()) + ")");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw Error("adamw_step: non-finite gradient at coordinate " +
                  std::to_string(i));
    }
  }

  const auto& h = state.hyper;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(h.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, double(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = h.beta1 * m + (1.0 - h.beta1) * grads[i];
    v = h.beta2 * v + (1.0 - h.beta2) * grads[i] * grads[i];
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] -=
        h.lr * (mhat / (std::sqrt(vhat) + h.eps) + h.weight_decay * params[i]);
  }
}

}  // namespace star
