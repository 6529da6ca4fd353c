#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgerl/rl/diversity.hpp"
#include "edgerl/rl/losses.hpp"
#include "edgerl/rl/network.hpp"
#include "edgerl/rl/types.hpp"

namespace edgerl::rl {

// A decision logged while the agent awaits a federated aggregation round.
struct HistoryStep {
  State state;
  std::vector<int> chosen;
};

// One continual-learning agent attached to a pipeline stage. Owns its
// network, optimizer, episode buffer, diversity buffer and random stream;
// a single logical owner drives it, so no internal locking.
class Agent {
 public:
  Agent(std::string id, ActionSpaceSpec spec, TrainConfig cfg,
        HeadLayout layout, std::uint64_t seed);

  const std::string& id() const { return id_; }
  const ActionSpaceSpec& spec() const { return spec_; }
  const TrainConfig& config() const { return cfg_; }
  const AgentNetwork& network() const { return net_; }
  const EpisodeBuffer& episode() const { return episode_; }
  const DiversityBuffer& diversity_buffer() const { return buffer_; }
  const LossReport& last_report() const { return last_report_; }

  Decision decide(const State& s);

  // Finalizes one decision step with its observed reward: scores diversity,
  // stores the experience in both buffers.
  void complete_step(const State& s, const Decision& d, double reward);

  bool episode_full() const {
    return static_cast<int>(episode_.size()) >= cfg_.steps_per_episode;
  }

  // One episode update per the gated loss: recomputes the policy under the
  // current parameters, evaluates the composite loss, and applies a single
  // optimizer step unless |loss| stays under the gate. Clears the episode
  // either way. Safe to call on a partial (force-closed) episode.
  LossReport update();

  // Federation support: while awaiting an aggregated model the agent keeps
  // serving but only logs (state, action) history.
  void begin_await();
  void end_await();
  bool awaiting() const { return awaiting_; }
  void log_history(const State& s, const std::vector<int>& chosen);
  const std::vector<HistoryStep>& history() const { return history_; }

  // Replaces the network (shape-checked), resets optimizer moments and
  // drops any in-flight episode.
  void load_network(AgentNetwork net);

  Rng& rng() { return rng_; }

 private:
  std::string id_;
  ActionSpaceSpec spec_;
  TrainConfig cfg_;
  AgentNetwork net_;
  nn::OptimizerState optimizer_;
  EpisodeBuffer episode_;
  DiversityBuffer buffer_;
  std::vector<HistoryStep> history_;
  LossReport last_report_;
  Rng rng_;
  bool awaiting_ = false;
};

}  // namespace edgerl::rl
