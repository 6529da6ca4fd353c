#pragma once

#include <vector>

#include "edgerl/rl/types.hpp"

namespace edgerl::rl {

// Normalized reward for one decision window, clamped to [-1, 1]:
//   0.5 * (tw * throughput/rate - lw * latency - ow * (batch + violations)/rate)
// with the weights taken from cfg. Throws std::invalid_argument when
// request_rate <= 0.
double compute_reward(double throughput, double request_rate, double latency_s,
                      int batch_size, int slo_violations,
                      const TrainConfig& cfg);

// Generalized advantage estimation. values carries one bootstrap entry more
// than rewards; the recursion is A_t = delta_t + gamma*lambda*A_{t+1} with
// delta_t = r_t + gamma*V_{t+1} - V_t. Throws on a length mismatch.
std::vector<double> compute_gae(const std::vector<double>& rewards,
                                const std::vector<double>& values,
                                double gamma, double lambda);

// Probability ratio of one step: product over heads of
// new[h][chosen[h]] / old[h][chosen[h]], old probabilities clamped at 1e-12.
double step_ratio(const std::vector<nn::Vector>& new_probs,
                  const std::vector<nn::Vector>& old_probs,
                  const std::vector<int>& chosen);

// Policy loss: mean over steps of min(clip*ratio, ratio)*(A_t + exp(-r_t)).
// old probabilities and rewards come from the episode record.
double policy_loss(const EpisodeBuffer& episode,
                   const std::vector<std::vector<nn::Vector>>& new_probs,
                   const std::vector<std::vector<nn::Vector>>& old_probs,
                   const std::vector<double>& advantages,
                   const TrainConfig& cfg);

// Same objective with the ratio restricted to a single head; one entry per
// head. These magnitudes are what clients report for head aggregation.
std::vector<double> policy_loss_per_head(
    const EpisodeBuffer& episode,
    const std::vector<std::vector<nn::Vector>>& new_probs,
    const std::vector<std::vector<nn::Vector>>& old_probs,
    const std::vector<double>& advantages, const TrainConfig& cfg);

// Mean squared error between recorded value estimates and rewards.
double value_loss(const EpisodeBuffer& episode);

// Eq-style total: l_p + l_v + penalty_weight * mean(res_idx + mt_idx).
double total_loss(double policy, double value, const EpisodeBuffer& episode,
                  const TrainConfig& cfg);

double action_penalty(const EpisodeBuffer& episode, const TrainConfig& cfg);

}  // namespace edgerl::rl
