#pragma once

#include <vector>

#include "edgerl/nn/tensor.hpp"

namespace edgerl::nn {

enum class UpdateRule {
  kAdaptiveMoments,  // first/second moment estimates with bias correction
  kPlainGradient,    // w -= lr * g
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  UpdateRule rule = UpdateRule::kAdaptiveMoments;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter moment state for an ordered list of layers. The layer list
// passed to step() must keep the same order and shapes across calls.
class OptimizerState {
 public:
  explicit OptimizerState(OptimizerConfig cfg) : cfg_(cfg) {}

  // Applies one update and clears the gradients. If any gradient is
  // non-finite the step is rejected: parameters, moments and the step
  // counter stay untouched (gradients are still cleared) and false returns.
  bool step(const std::vector<LayerParams*>& params,
            const std::vector<LayerGrads*>& grads);

  // Drops moments and the step counter (used after a model is replaced).
  void reset();

  const OptimizerConfig& config() const { return cfg_; }
  long step_count() const { return step_count_; }

 private:
  OptimizerConfig cfg_;
  long step_count_ = 0;
  std::vector<std::vector<double>> m_;  // flattened per layer: weights then bias
  std::vector<std::vector<double>> v_;
};

}  // namespace edgerl::nn
