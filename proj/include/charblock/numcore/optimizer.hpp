#pragma once

#include <map>
#include <string>

#include "charblock/numcore/param_store.hpp"

namespace charblock {

enum class OptimizerKind { adam, adamw };

struct TrainHyper {
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-4;
  int warmup_steps = 0;
  int batch_size = 32;
  double label_smoothing = 0.0;
  double weight_decay = 0.01;  // adamw only
  int max_steps = 5000;
  int patience = 10;    // early-stop patience in evaluations; <=0 disables
  int eval_every = 200; // steps between validation evaluations

  void validate() const {
    check(learning_rate > 0, "TrainHyper: learning_rate must be > 0");
    check(label_smoothing >= 0 && label_smoothing < 1,
          "TrainHyper: label_smoothing must be in [0,1)");
    check(warmup_steps >= 0, "TrainHyper: warmup_steps must be >= 0");
    check(batch_size >= 1, "TrainHyper: batch_size must be >= 1");
    check(max_steps >= 1, "TrainHyper: max_steps must be >= 1");
  }
};

// Linear ramp 0 -> 1 over warmup_steps, constant 1 afterwards. `step` is the
// 1-based update index; schedule(0) is 0 by convention.
inline double lr_schedule(long step, const TrainHyper& hyper) {
  check(step >= 0, "lr_schedule: step must be >= 0");
  if (hyper.warmup_steps <= 0) return 1.0;
  if (step >= hyper.warmup_steps) return 1.0;
  return static_cast<double>(step) / hyper.warmup_steps;
}

// Adam / AdamW update in place. `step` is 1-based (drives both bias
// correction and the warmup schedule). Original Adam constants.
template <typename Scalar>
void optimizer_step(ParamStore<Scalar>& store,
                    const std::map<std::string, Mat<Scalar>>& grads,
                    const TrainHyper& hyper, long step) {
  check(step >= 1, "optimizer_step: step is 1-based");
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double lr = hyper.learning_rate * lr_schedule(step, hyper);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));

  for (const auto& [name, g] : grads) {
    auto it = store.slots.find(name);
    check(it != store.slots.end(), "optimizer_step: gradient for unknown parameter " + name);
    auto& slot = it->second;
    check(g.rows() == slot.value.rows() && g.cols() == slot.value.cols(),
          "optimizer_step: gradient shape mismatch for " + name);
    slot.m = Scalar(beta1) * slot.m + Scalar(1.0 - beta1) * g;
    slot.v = (Scalar(beta2) * slot.v.array() + Scalar(1.0 - beta2) * g.array().square()).matrix();
    const auto m_hat = slot.m.array() / Scalar(bc1);
    const auto v_hat = slot.v.array() / Scalar(bc2);
    slot.value.array() -= Scalar(lr) * m_hat / (v_hat.sqrt() + Scalar(eps));
    if (hyper.optimizer == OptimizerKind::adamw && hyper.weight_decay > 0) {
      slot.value.array() -= Scalar(lr * hyper.weight_decay) * slot.value.array();
    }
  }
}

}  // namespace charblock
