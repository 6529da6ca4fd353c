#include "edgerl/rl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgerl::rl {

namespace {
constexpr double kProbFloor = 1e-12;
}

double compute_reward(double throughput, double request_rate, double latency_s,
                      int batch_size, int slo_violations,
                      const TrainConfig& cfg) {
  if (request_rate <= 0.0)
    throw std::invalid_argument("compute_reward: request_rate must be > 0");
  const double goodput = cfg.reward_throughput_weight * throughput / request_rate;
  const double lat = cfg.reward_latency_weight * latency_s;
  const double oversize = cfg.reward_oversize_weight *
                          (static_cast<double>(batch_size) + slo_violations) /
                          request_rate;
  const double r = 0.5 * (goodput - lat - oversize);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> compute_gae(const std::vector<double>& rewards,
                                const std::vector<double>& values,
                                double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw std::invalid_argument(
        "compute_gae: values must hold rewards.size()+1 entries");
  const std::size_t n = rewards.size();
  std::vector<double> advantages(n, 0.0);
  double next = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double delta = rewards[i] + gamma * values[i + 1] - values[i];
    next = delta + gamma * lambda * next;
    advantages[i] = next;
  }
  return advantages;
}

double step_ratio(const std::vector<nn::Vector>& new_probs,
                  const std::vector<nn::Vector>& old_probs,
                  const std::vector<int>& chosen) {
  if (new_probs.size() != old_probs.size() || new_probs.size() != chosen.size())
    throw std::invalid_argument("step_ratio: head count mismatch");
  double ratio = 1.0;
  for (std::size_t h = 0; h < new_probs.size(); ++h) {
    const auto idx = static_cast<std::size_t>(chosen[h]);
    ratio *= new_probs[h][idx] / std::max(old_probs[h][idx], kProbFloor);
  }
  return ratio;
}

namespace {

double clipped_ratio_objective(const EpisodeBuffer& episode,
                               const std::vector<double>& ratios,
                               const std::vector<double>& advantages,
                               const TrainConfig& cfg) {
  double sum = 0.0;
  for (std::size_t t = 0; t < episode.size(); ++t) {
    const double m = std::min(cfg.ratio_clip * ratios[t], ratios[t]);
    sum += m * (advantages[t] + std::exp(-episode.steps[t].reward));
  }
  return sum / static_cast<double>(episode.size());
}

}  // namespace

double policy_loss(const EpisodeBuffer& episode,
                   const std::vector<std::vector<nn::Vector>>& new_probs,
                   const std::vector<std::vector<nn::Vector>>& old_probs,
                   const std::vector<double>& advantages,
                   const TrainConfig& cfg) {
  if (episode.empty()) throw std::invalid_argument("policy_loss: empty episode");
  if (new_probs.size() != episode.size() || old_probs.size() != episode.size() ||
      advantages.size() != episode.size())
    throw std::invalid_argument("policy_loss: length mismatch");
  std::vector<double> ratios(episode.size());
  for (std::size_t t = 0; t < episode.size(); ++t)
    ratios[t] = step_ratio(new_probs[t], old_probs[t], episode.steps[t].chosen);
  return clipped_ratio_objective(episode, ratios, advantages, cfg);
}

std::vector<double> policy_loss_per_head(
    const EpisodeBuffer& episode,
    const std::vector<std::vector<nn::Vector>>& new_probs,
    const std::vector<std::vector<nn::Vector>>& old_probs,
    const std::vector<double>& advantages, const TrainConfig& cfg) {
  if (episode.empty())
    throw std::invalid_argument("policy_loss_per_head: empty episode");
  const std::size_t heads = new_probs.front().size();
  std::vector<double> per_head(heads, 0.0);
  std::vector<double> ratios(episode.size());
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t t = 0; t < episode.size(); ++t) {
      const auto idx = static_cast<std::size_t>(episode.steps[t].chosen[h]);
      ratios[t] =
          new_probs[t][h][idx] / std::max(old_probs[t][h][idx], kProbFloor);
    }
    per_head[h] = clipped_ratio_objective(episode, ratios, advantages, cfg);
  }
  return per_head;
}

double value_loss(const EpisodeBuffer& episode) {
  if (episode.empty()) throw std::invalid_argument("value_loss: empty episode");
  double sum = 0.0;
  for (const Experience& e : episode.steps) {
    const double d = e.value_estimate - e.reward;
    sum += d * d;
  }
  return sum / static_cast<double>(episode.size());
}

double action_penalty(const EpisodeBuffer& episode, const TrainConfig& cfg) {
  if (episode.empty()) return 0.0;
  double sum = 0.0;
  for (const Experience& e : episode.steps)
    sum += static_cast<double>(e.action.res_idx + e.action.mt_idx);
  return cfg.penalty_weight * sum / static_cast<double>(episode.size());
}

double total_loss(double policy, double value, const EpisodeBuffer& episode,
                  const TrainConfig& cfg) {
  if (episode.empty()) throw std::invalid_argument("total_loss: empty episode");
  return policy + value + action_penalty(episode, cfg);
}

}  // namespace edgerl::rl
