#include "edgerl/rl/network.hpp"

#include <cmath>
#include <stdexcept>

namespace edgerl::rl {

bool State::finite() const {
  for (double v : as_array())
    if (!std::isfinite(v)) return false;
  return true;
}

void State::validate() const {
  if (!finite()) throw std::invalid_argument("State: non-finite field");
  if (preproc_fill < 0.0 || preproc_fill > 1.0 || postproc_fill < 0.0 ||
      postproc_fill > 1.0)
    throw std::invalid_argument("State: fill fraction outside [0, 1]");
}

void ActionSpaceSpec::validate() const {
  auto check = [](const std::vector<int>& v, const char* name) {
    if (v.empty())
      throw std::invalid_argument(std::string(name) + ": empty choice list");
    int prev = 0;
    for (int x : v) {
      if (x <= prev)
        throw std::invalid_argument(std::string(name) +
                                    ": choices must be strictly increasing "
                                    "positive integers");
      prev = x;
    }
  };
  check(res_choices, "res_choices");
  check(bs_choices, "bs_choices");
  check(mt_choices, "mt_choices");
}

void Action::validate(const ActionSpaceSpec& spec) const {
  if (res_idx < 0 || static_cast<std::size_t>(res_idx) >= spec.res_choices.size())
    throw std::out_of_range("Action: res_idx out of range");
  if (bs_idx < 0 || static_cast<std::size_t>(bs_idx) >= spec.bs_choices.size())
    throw std::out_of_range("Action: bs_idx out of range");
  if (mt_idx < 0 || static_cast<std::size_t>(mt_idx) >= spec.mt_choices.size())
    throw std::out_of_range("Action: mt_idx out of range");
}

void TrainConfig::validate() const {
  if (steps_per_episode < 1)
    throw std::invalid_argument("steps_per_episode must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
  if (loss_gate <= 0.0) throw std::invalid_argument("loss_gate must be > 0");
  if (diversity_capacity < 1)
    throw std::invalid_argument("diversity_capacity must be >= 1");
}

AgentNetwork AgentNetwork::init(const ActionSpaceSpec& spec, HeadLayout layout,
                                Rng& rng) {
  spec.validate();
  AgentNetwork net;
  net.layout = layout;
  net.n_res = spec.res_choices.size();
  net.n_bs = spec.bs_choices.size();
  net.n_mt = spec.mt_choices.size();
  net.layer1 = nn::LayerParams::init(kHiddenDim, State::kDim, rng);
  net.layer2 = nn::LayerParams::init(kFeatureDim, kHiddenDim, rng);
  net.value = nn::LayerParams::init(1, kFeatureDim, rng);
  if (layout == HeadLayout::kCascade) {
    net.head_res = nn::LayerParams::init(net.n_res, kFeatureDim, rng);
    net.head_bs = nn::LayerParams::init(net.n_bs, kFeatureDim + net.n_res, rng);
    net.head_mt = nn::LayerParams::init(net.n_mt, kFeatureDim + net.n_res, rng);
  } else {
    net.head_joint =
        nn::LayerParams::init(net.n_res * net.n_bs * net.n_mt, kFeatureDim, rng);
  }
  return net;
}

std::vector<nn::LayerParams*> AgentNetwork::layers() {
  if (layout == HeadLayout::kCascade)
    return {&layer1, &layer2, &value, &head_res, &head_bs, &head_mt};
  return {&layer1, &layer2, &value, &head_joint};
}

std::vector<const nn::LayerParams*> AgentNetwork::layers() const {
  if (layout == HeadLayout::kCascade)
    return {&layer1, &layer2, &value, &head_res, &head_bs, &head_mt};
  return {&layer1, &layer2, &value, &head_joint};
}

std::vector<nn::LayerParams*> AgentNetwork::head_layers() {
  if (layout == HeadLayout::kCascade) return {&head_res, &head_bs, &head_mt};
  return {&head_joint};
}

std::size_t AgentNetwork::param_count() const {
  std::size_t n = 0;
  for (const nn::LayerParams* p : layers()) n += p->param_count();
  return n;
}

bool AgentNetwork::same_shape(const AgentNetwork& o) const {
  return layout == o.layout && n_res == o.n_res && n_bs == o.n_bs &&
         n_mt == o.n_mt;
}

NetworkGrads::NetworkGrads(const AgentNetwork& net)
    : layer1(net.layer1),
      layer2(net.layer2),
      value(net.value),
      head_res(net.head_res),
      head_bs(net.head_bs),
      head_mt(net.head_mt),
      head_joint(net.head_joint) {}

std::vector<nn::LayerGrads*> NetworkGrads::layers(const AgentNetwork& net) {
  if (net.layout == HeadLayout::kCascade)
    return {&layer1, &layer2, &value, &head_res, &head_bs, &head_mt};
  return {&layer1, &layer2, &value, &head_joint};
}

std::vector<nn::LayerGrads*> NetworkGrads::head_layers(const AgentNetwork& net) {
  if (net.layout == HeadLayout::kCascade) return {&head_res, &head_bs, &head_mt};
  return {&head_joint};
}

void NetworkGrads::clear() {
  layer1.clear();
  layer2.clear();
  value.clear();
  head_res.clear();
  head_bs.clear();
  head_mt.clear();
  head_joint.clear();
}

std::vector<nn::Vector> ForwardCache::head_probs(HeadLayout layout) const {
  if (layout == HeadLayout::kCascade) return {p_res, p_bs, p_mt};
  return {p_joint};
}

ForwardCache forward(const AgentNetwork& net, const State& s) {
  s.validate();
  ForwardCache c;
  c.input = s.as_vector();
  c.z1 = nn::linear_forward(net.layer1, c.input);
  c.h1 = nn::relu(c.z1);
  c.features = nn::linear_forward(net.layer2, c.h1);
  c.value = nn::linear_forward(net.value, c.features)[0];
  if (net.layout == HeadLayout::kCascade) {
    c.p_res = nn::softmax(nn::linear_forward(net.head_res, c.features));
    c.extended = c.features;
    c.extended.insert(c.extended.end(), c.p_res.begin(), c.p_res.end());
    c.p_bs = nn::softmax(nn::linear_forward(net.head_bs, c.extended));
    c.p_mt = nn::softmax(nn::linear_forward(net.head_mt, c.extended));
  } else {
    c.p_joint = nn::softmax(nn::linear_forward(net.head_joint, c.features));
  }
  return c;
}

void backward(const AgentNetwork& net, const ForwardCache& cache,
              const OutputGrads& out, NetworkGrads& grads) {
  nn::Vector d_features(kFeatureDim, 0.0);

  // Value head.
  if (out.d_value != 0.0) {
    nn::Vector d_value_out{out.d_value};
    nn::linear_backward(net.value, cache.features, d_value_out, grads.value,
                        &d_features);
  }

  if (net.layout == HeadLayout::kCascade) {
    if (cache.p_res.empty())
      throw std::logic_error("backward: cache does not match cascade layout");
    // Heads 2-3 read the extended vector; their input gradient splits into a
    // feature part and an extra path into the resolution probabilities.
    nn::Vector d_extended(cache.extended.size(), 0.0);
    nn::Vector d_logits;
    if (!out.d_p_bs.empty()) {
      nn::softmax_backward(cache.p_bs, out.d_p_bs, d_logits);
      nn::linear_backward(net.head_bs, cache.extended, d_logits, grads.head_bs,
                          &d_extended);
    }
    if (!out.d_p_mt.empty()) {
      nn::softmax_backward(cache.p_mt, out.d_p_mt, d_logits);
      nn::linear_backward(net.head_mt, cache.extended, d_logits, grads.head_mt,
                          &d_extended);
    }
    nn::Vector d_p_res(cache.p_res.size(), 0.0);
    for (std::size_t i = 0; i < kFeatureDim; ++i) d_features[i] += d_extended[i];
    for (std::size_t i = 0; i < cache.p_res.size(); ++i)
      d_p_res[i] = d_extended[kFeatureDim + i];
    if (!out.d_p_res.empty())
      for (std::size_t i = 0; i < d_p_res.size(); ++i) d_p_res[i] += out.d_p_res[i];

    nn::softmax_backward(cache.p_res, d_p_res, d_logits);
    nn::linear_backward(net.head_res, cache.features, d_logits, grads.head_res,
                        &d_features);
  } else {
    if (cache.p_joint.empty())
      throw std::logic_error("backward: cache does not match single-head layout");
    if (!out.d_p_joint.empty()) {
      nn::Vector d_logits;
      nn::softmax_backward(cache.p_joint, out.d_p_joint, d_logits);
      nn::linear_backward(net.head_joint, cache.features, d_logits,
                          grads.head_joint, &d_features);
    }
  }

  nn::Vector d_h1(kHiddenDim, 0.0);
  nn::linear_backward(net.layer2, cache.h1, d_features, grads.layer2, &d_h1);
  nn::relu_backward(cache.z1, d_h1);
  nn::linear_backward(net.layer1, cache.input, d_h1, grads.layer1, nullptr);
}

Decision decide(const AgentNetwork& net, const State& s, Rng& rng) {
  ForwardCache c = forward(net, s);
  Decision d;
  d.value = c.value;
  d.probs = c.head_probs(net.layout);
  if (net.layout == HeadLayout::kCascade) {
    const int res = static_cast<int>(nn::categorical_sample(c.p_res, rng));
    const int bs = static_cast<int>(nn::categorical_sample(c.p_bs, rng));
    const int mt = static_cast<int>(nn::categorical_sample(c.p_mt, rng));
    d.action = Action{res, bs, mt};
    d.chosen = {res, bs, mt};
  } else {
    const std::size_t j = nn::categorical_sample(c.p_joint, rng);
    d.action = joint_action(net, j);
    d.chosen = {static_cast<int>(j)};
  }
  return d;
}

std::size_t joint_index(const AgentNetwork& net, const Action& a) {
  return (static_cast<std::size_t>(a.res_idx) * net.n_bs +
          static_cast<std::size_t>(a.bs_idx)) *
             net.n_mt +
         static_cast<std::size_t>(a.mt_idx);
}

Action joint_action(const AgentNetwork& net, std::size_t idx) {
  Action a;
  a.mt_idx = static_cast<int>(idx % net.n_mt);
  idx /= net.n_mt;
  a.bs_idx = static_cast<int>(idx % net.n_bs);
  a.res_idx = static_cast<int>(idx / net.n_bs);
  return a;
}

}  // namespace edgerl::rl
