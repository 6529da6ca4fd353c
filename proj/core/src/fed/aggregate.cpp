#include "edgerl/fed/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "edgerl/nn/ops.hpp"
#include "edgerl/nn/optimizer.hpp"

namespace edgerl::fed {

namespace {

constexpr double kLossEps = 1e-6;
constexpr double kProbFloor = 1e-12;

void check_shape(const nn::LayerParams& a, const nn::LayerParams& b,
                 const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string("aggregate: shape mismatch in ") +
                                what);
}

// out += layer (element-wise).
void accumulate(nn::LayerParams& out, const nn::LayerParams& layer,
                double weight) {
  for (std::size_t i = 0; i < out.weights.data.size(); ++i)
    out.weights.data[i] += weight * layer.weights.data[i];
  for (std::size_t i = 0; i < out.bias.size(); ++i)
    out.bias[i] += weight * layer.bias[i];
}

void scale(nn::LayerParams& out, double s) {
  for (double& w : out.weights.data) w *= s;
  for (double& b : out.bias) b *= s;
}

nn::LayerParams zeros_like(const nn::LayerParams& p) {
  return nn::LayerParams(p.out_dim(), p.in_dim());
}

}  // namespace

GlobalModel GlobalModel::init(Rng& rng) {
  GlobalModel g;
  g.layer1 = nn::LayerParams::init(rl::kHiddenDim, rl::State::kDim, rng);
  g.layer2 = nn::LayerParams::init(rl::kFeatureDim, rl::kHiddenDim, rng);
  g.value = nn::LayerParams::init(1, rl::kFeatureDim, rng);
  return g;
}

std::vector<HeadKey> head_keys(const rl::AgentNetwork& net) {
  if (net.layout != rl::HeadLayout::kCascade)
    throw std::invalid_argument("head_keys: only cascade networks federate");
  return {
      HeadKey{"res", net.head_res.in_dim(), net.head_res.out_dim()},
      HeadKey{"bs", net.head_bs.in_dim(), net.head_bs.out_dim()},
      HeadKey{"mt", net.head_mt.in_dim(), net.head_mt.out_dim()},
  };
}

ModelUpdate model_update_from(const std::string& id,
                              const rl::AgentNetwork& net,
                              const std::vector<double>& per_head_loss) {
  if (net.layout != rl::HeadLayout::kCascade)
    throw std::invalid_argument("model_update_from: cascade network required");
  if (per_head_loss.size() != 3)
    throw std::invalid_argument("model_update_from: need three head losses");
  ModelUpdate u;
  u.id = id;
  u.layer1 = net.layer1;
  u.layer2 = net.layer2;
  u.value = net.value;
  const auto keys = head_keys(net);
  const nn::LayerParams* heads[3] = {&net.head_res, &net.head_bs, &net.head_mt};
  for (int h = 0; h < 3; ++h)
    u.heads.emplace(keys[static_cast<std::size_t>(h)],
                    HeadUpdate{*heads[h],
                               std::max(per_head_loss[static_cast<std::size_t>(h)], 0.0)});
  return u;
}

std::vector<double> inverse_loss_weights(const std::vector<double>& losses) {
  std::vector<double> w(losses.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    w[i] = 1.0 / (std::max(losses[i], 0.0) + kLossEps);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

AggregationResult aggregate(const GlobalModel* base,
                            const std::vector<ModelUpdate>& updates) {
  if (updates.empty())
    throw std::invalid_argument("aggregate: no client updates");
  const double m = static_cast<double>(updates.size());

  AggregationResult result;
  GlobalModel& out = result.model;

  // Backbone + value: equal mean over {base} u clients.
  const double denom = base ? m + 1.0 : m;
  out.layer1 = base ? base->layer1 : zeros_like(updates.front().layer1);
  out.layer2 = base ? base->layer2 : zeros_like(updates.front().layer2);
  out.value = base ? base->value : zeros_like(updates.front().value);
  for (const ModelUpdate& u : updates) {
    check_shape(out.layer1, u.layer1, "layer1");
    check_shape(out.layer2, u.layer2, "layer2");
    check_shape(out.value, u.value, "value");
    accumulate(out.layer1, u.layer1, 1.0);
    accumulate(out.layer2, u.layer2, 1.0);
    accumulate(out.value, u.value, 1.0);
  }
  scale(out.layer1, 1.0 / denom);
  scale(out.layer2, 1.0 / denom);
  scale(out.value, 1.0 / denom);

  // Banks: carry over existing entries, then fold in per-key client sets.
  if (base) out.banks = base->banks;

  std::set<HeadKey> keys;
  for (const ModelUpdate& u : updates)
    for (const auto& [key, head] : u.heads) keys.insert(key);

  for (const HeadKey& key : keys) {
    std::vector<const ModelUpdate*> members;
    std::vector<double> losses;
    for (const ModelUpdate& u : updates) {
      auto it = u.heads.find(key);
      if (it == u.heads.end()) continue;
      members.push_back(&u);
      losses.push_back(it->second.loss);
    }
    const std::vector<double> weights = inverse_loss_weights(losses);
    auto& report = result.bank_weights[key];
    for (std::size_t i = 0; i < members.size(); ++i)
      report.emplace_back(members[i]->id, weights[i]);

    const double md = static_cast<double>(members.size());
    nn::LayerParams blended = zeros_like(members.front()->heads.at(key).head);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const nn::LayerParams& head = members[i]->heads.at(key).head;
      check_shape(blended, head, "action head");
      accumulate(blended, head, weights[i]);
    }

    auto bank_it = out.banks.find(key);
    if (base && bank_it != out.banks.end()) {
      // Blend the stored bank head at 1/(|M_d|+1), mirroring the backbone.
      nn::LayerParams merged = bank_it->second;
      scale(merged, 1.0 / (md + 1.0));
      accumulate(merged, blended, md / (md + 1.0));
      bank_it->second = std::move(merged);
    } else {
      out.banks[key] = std::move(blended);
    }
  }
  return result;
}

rl::AgentNetwork assemble_for_agent(const GlobalModel& global,
                                    const rl::AgentNetwork& current) {
  if (current.layout != rl::HeadLayout::kCascade)
    throw std::invalid_argument("assemble_for_agent: cascade network required");
  rl::AgentNetwork net = current;
  net.layer1 = global.layer1;
  net.layer2 = global.layer2;
  net.value = global.value;
  const auto keys = head_keys(current);
  nn::LayerParams* heads[3] = {&net.head_res, &net.head_bs, &net.head_mt};
  for (int h = 0; h < 3; ++h) {
    auto it = global.banks.find(keys[static_cast<std::size_t>(h)]);
    if (it != global.banks.end()) *heads[h] = it->second;
  }
  return net;
}

FinetuneReport finetune_heads(rl::AgentNetwork& candidate,
                              const std::vector<rl::HistoryStep>& history,
                              const rl::TrainConfig& cfg) {
  FinetuneReport report;
  report.history_steps = history.size();
  if (history.empty()) return report;

  rl::NetworkGrads grads(candidate);
  const double inv_n = 1.0 / static_cast<double>(history.size());
  double loss = 0.0;
  for (const rl::HistoryStep& step : history) {
    const rl::ForwardCache cache = rl::forward(candidate, step.state);
    const auto probs = cache.head_probs(candidate.layout);
    rl::OutputGrads out;
    auto fill = [&](nn::Vector& d, const nn::Vector& p, int idx) {
      loss += nn::neg_log_likelihood(p, static_cast<std::size_t>(idx)) * inv_n;
      d.assign(p.size(), 0.0);
      d[static_cast<std::size_t>(idx)] =
          -inv_n / std::max(p[static_cast<std::size_t>(idx)], kProbFloor);
    };
    if (candidate.layout == rl::HeadLayout::kCascade) {
      fill(out.d_p_res, probs[0], step.chosen[0]);
      fill(out.d_p_bs, probs[1], step.chosen[1]);
      fill(out.d_p_mt, probs[2], step.chosen[2]);
    } else {
      fill(out.d_p_joint, probs[0], step.chosen[0]);
    }
    rl::backward(candidate, cache, out, grads);
  }
  report.loss = loss;

  nn::OptimizerState opt(nn::OptimizerConfig{cfg.learning_rate, cfg.update_rule});
  report.stepped =
      opt.step(candidate.head_layers(), grads.head_layers(candidate));
  return report;
}

}  // namespace edgerl::fed
