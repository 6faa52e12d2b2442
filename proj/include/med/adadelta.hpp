#pragma once

#include <vector>

#include "med/tensor.hpp"

namespace med::nn {

// L2 norm over the whole gradient set. Null entries count as zero.
double global_norm(const std::vector<const Tensor*>& grads);

// Factor that rescales the set onto the max_norm ball when it lies outside,
// 1 otherwise. max_norm <= 0 disables clipping.
double clip_global_norm(const std::vector<const Tensor*>& grads,
                        double max_norm);

struct AdadeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
};

// Adadelta with per-element decaying accumulators of squared gradients and
// squared updates:
//   Eg <- rho Eg + (1 - rho) g^2
//   d   = -sqrt(Eu + eps) / sqrt(Eg + eps) * g
//   Eu <- rho Eu + (1 - rho) d^2
//   p  <- p + d
// Gradients are rescaled by the global-norm clip factor before the update.
// A null gradient acts as zero: the parameter keeps its value while both
// accumulators decay.
class Adadelta {
 public:
  explicit Adadelta(std::vector<Tensor*> params, AdadeltaConfig config = {});

  void step(const std::vector<const Tensor*>& grads, double clip_norm);

  const AdadeltaConfig& config() const { return config_; }
  const std::vector<Tensor>& acc_grad() const { return acc_grad_; }
  const std::vector<Tensor>& acc_update() const { return acc_update_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> acc_grad_;
  std::vector<Tensor> acc_update_;
  AdadeltaConfig config_;
};

}  // namespace med::nn
