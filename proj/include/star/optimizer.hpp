#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace star {

// Warmup then linear decay: 0 -> base_lr over [0, warmup], base_lr -> 0
// over [warmup, total]. Steps past total clamp to 0.
double lr_at(uint64_t step, uint64_t warmup_steps, uint64_t total_steps,
             double base_lr);

struct AdamWHyper {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Moments for one parameter group. step counts completed updates and
// drives bias correction.
struct AdamWState {
  uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  AdamWHyper hyper;

  explicit AdamWState(size_t size, AdamWHyper h = {})
      : first_moment(size, 0.0), second_moment(size, 0.0), hyper(h) {}
};

// One decoupled-weight-decay update in place:
//   p -= lr * (mhat / (sqrt(vhat) + eps) + weight_decay * p).
// Non-finite gradients are rejected before any mutation.
void adamw_step(std::span<double> params, std::span<const double> grads,
                AdamWState& state);

}  // namespace star
