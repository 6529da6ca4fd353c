#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "edgerl/nn/optimizer.hpp"
#include "edgerl/nn/tensor.hpp"

namespace edgerl::rl {

// The 8-element observation an agent reads each decision step. All fields
// are normalized: rate by the stage's max service rate, drops by the step's
// arrival count, configuration indices by (choices - 1), queue fills by
// capacity, the SLO by one second.
struct State {
  static constexpr std::size_t kDim = 8;

  double arrival_rate = 0.0;
  double queue_drops = 0.0;
  double res_level = 0.0;
  double bs_level = 0.0;
  double mt_level = 0.0;
  double preproc_fill = 0.0;
  double postproc_fill = 0.0;
  double slo = 0.0;

  std::array<double, kDim> as_array() const {
    return {arrival_rate, queue_drops,  res_level,     bs_level,
            mt_level,     preproc_fill, postproc_fill, slo};
  }
  nn::Vector as_vector() const {
    const auto a = as_array();
    return nn::Vector(a.begin(), a.end());
  }
  static State from_array(const std::array<double, kDim>& a) {
    return State{a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }
  bool finite() const;
  // Throws std::invalid_argument when a field is non-finite or a fill
  // fraction leaves [0, 1].
  void validate() const;
};

// Per-stage action choices. Heterogeneous across agents; indices into these
// lists form the action space.
struct ActionSpaceSpec {
  std::vector<int> res_choices;  // packing factors (frames per inference item)
  std::vector<int> bs_choices;   // batch sizes
  std::vector<int> mt_choices;   // thread counts for pre- and post-processing

  void validate() const;  // non-empty, strictly increasing, positive
  std::size_t joint_size() const {
    return res_choices.size() * bs_choices.size() * mt_choices.size();
  }
  bool same_dims(const ActionSpaceSpec& o) const {
    return res_choices.size() == o.res_choices.size() &&
           bs_choices.size() == o.bs_choices.size() &&
           mt_choices.size() == o.mt_choices.size();
  }
};

struct Action {
  int res_idx = 0;
  int bs_idx = 0;
  int mt_idx = 0;

  bool operator==(const Action&) const = default;
  // Throws std::out_of_range when an index leaves its choice list.
  void validate(const ActionSpaceSpec& spec) const;
};

// One completed decision step. `probs` holds the per-head policy
// distributions at decision time (three heads for the cascade network, one
// for the single-head ablation); `chosen` holds the index taken per head.
struct Experience {
  State state;
  Action action;
  std::vector<int> chosen;
  std::vector<nn::Vector> probs;
  double reward = 0.0;
  double value_estimate = 0.0;
  double diversity = 0.0;
};

// The current episode's ordered steps, at most steps_per_episode long.
struct EpisodeBuffer {
  std::vector<Experience> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  void clear() { steps.clear(); }
};

// Training hyperparameters. Defaults follow the experiment configuration
// this artifact reproduces; every field is config-overridable.
struct TrainConfig {
  int steps_per_episode = 10;               // n_s
  double learning_rate = 1e-3;              // LR
  double reward_throughput_weight = 1.1;    // throughput/request-rate term
  double reward_latency_weight = 10.0;      // local latency term
  double reward_oversize_weight = 2.0;      // batch-size + SLO-violation term
  double discount = 0.1;                    // gamma
  double gae_decay = 0.1;                   // lambda
  double penalty_weight = 0.2;              // omega, loss penalty on res/mt
  double ratio_clip = 0.9;                  // epsilon in the policy loss
  double diversity_state_weight = 0.5;      // alpha
  double diversity_policy_weight = 0.5;     // beta
  double loss_gate = 0.05;                  // skip updates below this |loss|
  int diversity_capacity = 64;              // K
  nn::UpdateRule update_rule = nn::UpdateRule::kAdaptiveMoments;

  void validate() const;
};

// Outcome of one episode update. Per-head policy-loss magnitudes feed the
// federated head aggregation.
struct LossReport {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double penalty = 0.0;
  std::vector<double> per_head;
  bool applied = false;
  std::string error;  // non-empty when the update was rejected
};

}  // namespace edgerl::rl
