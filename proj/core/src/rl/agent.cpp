#include "edgerl/rl/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace edgerl::rl {

namespace {
constexpr double kProbFloor = 1e-12;
}

Agent::Agent(std::string id, ActionSpaceSpec spec, TrainConfig cfg,
             HeadLayout layout, std::uint64_t seed)
    : id_(std::move(id)),
      spec_(std::move(spec)),
      cfg_(cfg),
      net_(),
      optimizer_(nn::OptimizerConfig{cfg.learning_rate, cfg.update_rule}),
      buffer_(cfg.diversity_capacity),
      rng_(seed) {
  cfg_.validate();
  net_ = AgentNetwork::init(spec_, layout, rng_);
}

Decision Agent::decide(const State& s) { return rl::decide(net_, s, rng_); }

void Agent::complete_step(const State& s, const Decision& d, double reward) {
  Experience exp;
  exp.state = s;
  exp.action = d.action;
  exp.chosen = d.chosen;
  exp.probs = d.probs;
  exp.reward = reward;
  exp.value_estimate = d.value;
  exp.diversity = buffer_.score(s, d.probs, cfg_.diversity_state_weight,
                                cfg_.diversity_policy_weight);
  buffer_.insert(exp);
  episode_.steps.push_back(std::move(exp));
}

LossReport Agent::update() {
  LossReport report;
  report.per_head.assign(net_.head_count(), 0.0);
  const std::size_t n = episode_.size();
  if (n == 0) return report;

  // Recompute the policy and value under the current parameters so the loss
  // is differentiable; the recorded decision-time values are identical
  // because no update happens inside an episode.
  std::vector<ForwardCache> caches;
  caches.reserve(n);
  std::vector<std::vector<nn::Vector>> new_probs(n), old_probs(n);
  for (std::size_t t = 0; t < n; ++t) {
    caches.push_back(forward(net_, episode_.steps[t].state));
    new_probs[t] = caches[t].head_probs(net_.layout);
    old_probs[t] = episode_.steps[t].probs;
  }

  std::vector<double> rewards(n), values(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    rewards[t] = episode_.steps[t].reward;
    values[t] = episode_.steps[t].value_estimate;
  }
  const std::vector<double> advantages =
      compute_gae(rewards, values, cfg_.discount, cfg_.gae_decay);

  report.policy = policy_loss(episode_, new_probs, old_probs, advantages, cfg_);
  report.value = value_loss(episode_);
  report.penalty = action_penalty(episode_, cfg_);
  report.total = report.policy + report.value + report.penalty;
  {
    const std::vector<double> ph =
        policy_loss_per_head(episode_, new_probs, old_probs, advantages, cfg_);
    for (std::size_t h = 0; h < ph.size(); ++h)
      report.per_head[h] = std::abs(ph[h]);
  }

  if (!std::isfinite(report.total)) {
    report.applied = false;
    report.error = "non-finite loss; update skipped";
    episode_.clear();
    last_report_ = report;
    return report;
  }

  if (std::abs(report.total) < cfg_.loss_gate) {
    report.applied = false;
    episode_.clear();
    last_report_ = report;
    return report;
  }

  NetworkGrads grads(net_);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Experience& e = episode_.steps[t];
    const double ratio = step_ratio(new_probs[t], old_probs[t], e.chosen);
    const double min_deriv =
        cfg_.ratio_clip * ratio <= ratio ? cfg_.ratio_clip : 1.0;
    const double factor = advantages[t] + std::exp(-e.reward);
    const double d_ratio = inv_n * min_deriv * factor;

    OutputGrads out;
    out.d_value = 2.0 * (caches[t].value - e.reward) * inv_n;
    const auto fill_head = [&](nn::Vector& d, const nn::Vector& probs, int idx) {
      d.assign(probs.size(), 0.0);
      d[static_cast<std::size_t>(idx)] =
          d_ratio * ratio / std::max(probs[static_cast<std::size_t>(idx)], kProbFloor);
    };
    if (net_.layout == HeadLayout::kCascade) {
      fill_head(out.d_p_res, new_probs[t][0], e.chosen[0]);
      fill_head(out.d_p_bs, new_probs[t][1], e.chosen[1]);
      fill_head(out.d_p_mt, new_probs[t][2], e.chosen[2]);
    } else {
      fill_head(out.d_p_joint, new_probs[t][0], e.chosen[0]);
    }
    backward(net_, caches[t], out, grads);
  }

  const bool stepped = optimizer_.step(net_.layers(), grads.layers(net_));
  if (!stepped) {
    report.applied = false;
    report.error = "non-finite gradient; step rejected";
  } else {
    report.applied = true;
  }
  episode_.clear();
  last_report_ = report;
  return report;
}

void Agent::begin_await() {
  awaiting_ = true;
  history_.clear();
}

void Agent::end_await() {
  awaiting_ = false;
  history_.clear();
}

void Agent::log_history(const State& s, const std::vector<int>& chosen) {
  history_.push_back(HistoryStep{s, chosen});
}

void Agent::load_network(AgentNetwork net) {
  if (!net.same_shape(net_))
    throw std::invalid_argument("load_network: shape mismatch for agent " + id_);
  net_ = std::move(net);
  optimizer_.reset();
  episode_.clear();
}

}  // namespace edgerl::rl
