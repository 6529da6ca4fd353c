#pragma once

#include <vector>

#include "edgerl/nn/ops.hpp"
#include "edgerl/rl/types.hpp"
#include "edgerl/rng.hpp"

namespace edgerl::rl {

inline constexpr std::size_t kHiddenDim = 64;
inline constexpr std::size_t kFeatureDim = 48;

enum class HeadLayout {
  kCascade,     // three action heads; resolution probabilities feed heads 2-3
  kSingleHead,  // one joint head over res x bs x mt (ablation variant)
};

// Backbone (8 -> 64 -> 48), value head (48 -> 1) and action heads. In the
// cascade layout the resolution head reads the features and its probability
// vector is concatenated onto the features for the batch-size and
// multi-thread heads.
struct AgentNetwork {
  HeadLayout layout = HeadLayout::kCascade;
  std::size_t n_res = 0, n_bs = 0, n_mt = 0;

  nn::LayerParams layer1;     // 8 -> 64
  nn::LayerParams layer2;     // 64 -> 48
  nn::LayerParams value;      // 48 -> 1
  nn::LayerParams head_res;   // 48 -> n_res
  nn::LayerParams head_bs;    // 48 + n_res -> n_bs
  nn::LayerParams head_mt;    // 48 + n_res -> n_mt
  nn::LayerParams head_joint; // 48 -> n_res * n_bs * n_mt (single-head only)

  static AgentNetwork init(const ActionSpaceSpec& spec, HeadLayout layout,
                           Rng& rng);

  std::size_t head_count() const {
    return layout == HeadLayout::kCascade ? 3 : 1;
  }
  std::vector<nn::LayerParams*> layers();
  std::vector<const nn::LayerParams*> layers() const;
  std::vector<nn::LayerParams*> head_layers();
  std::size_t param_count() const;
  bool same_shape(const AgentNetwork& o) const;
};

// Gradient accumulators for every layer of an AgentNetwork.
struct NetworkGrads {
  nn::LayerGrads layer1, layer2, value, head_res, head_bs, head_mt, head_joint;

  explicit NetworkGrads(const AgentNetwork& net);
  std::vector<nn::LayerGrads*> layers(const AgentNetwork& net);
  std::vector<nn::LayerGrads*> head_layers(const AgentNetwork& net);
  void clear();
};

// Cached activations from one forward pass, consumed by backward().
struct ForwardCache {
  nn::Vector input;
  nn::Vector z1, h1;      // pre/post ReLU hidden
  nn::Vector features;
  nn::Vector p_res, extended, p_bs, p_mt;
  nn::Vector p_joint;
  double value = 0.0;

  // Per-head probability vectors in head order.
  std::vector<nn::Vector> head_probs(HeadLayout layout) const;
};

// Gradients of a scalar loss with respect to the network outputs.
struct OutputGrads {
  nn::Vector d_p_res, d_p_bs, d_p_mt;
  nn::Vector d_p_joint;
  double d_value = 0.0;
};

ForwardCache forward(const AgentNetwork& net, const State& s);

// Reverse pass through the fixed network graph; accumulates into grads.
// Throws std::logic_error when the cache does not match the layout.
void backward(const AgentNetwork& net, const ForwardCache& cache,
              const OutputGrads& out, NetworkGrads& grads);

struct Decision {
  Action action;
  std::vector<int> chosen;        // per-head sampled index
  std::vector<nn::Vector> probs;  // per-head distributions
  double value = 0.0;
};

// Samples one action per head from a forward pass.
Decision decide(const AgentNetwork& net, const State& s, Rng& rng);

// Joint-index packing for the single-head layout (res-major order).
std::size_t joint_index(const AgentNetwork& net, const Action& a);
Action joint_action(const AgentNetwork& net, std::size_t idx);

}  // namespace edgerl::rl
