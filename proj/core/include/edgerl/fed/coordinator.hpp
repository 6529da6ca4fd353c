#pragma once

#include <map>
#include <string>
#include <vector>

#include "edgerl/fed/aggregate.hpp"
#include "edgerl/fed/model.hpp"
#include "edgerl/fed/selection.hpp"
#include "edgerl/rl/agent.hpp"
#include "edgerl/sim/stage.hpp"

namespace edgerl::fed {

struct ClientRef {
  rl::Agent* agent = nullptr;
  const sim::DeviceProfile* device = nullptr;
};

struct RoundOutcome {
  bool skipped = false;
  std::vector<std::string> participants;
  double latency_s = 0.0;  // simulated transfer + server time, non-blocking
  std::size_t payload_bytes_total = 0;
  std::map<HeadKey, std::vector<std::pair<std::string, double>>> bank_weights;
};

// One cluster's aggregation server. Rounds are split in two phases so the
// simulation can keep serving while a round is "in flight": start_round
// selects, collects and aggregates; deliver() later hands the aggregated
// model to one participant and fine-tunes it on that agent's history.
class Coordinator {
 public:
  Coordinator(std::string server_id, GlobalModel initial, SelectionConfig cfg,
              double server_cost_s, std::uint64_t seed);

  const std::string& server_id() const { return server_id_; }
  const GlobalModel& model() const { return model_; }
  void set_model(GlobalModel m) { model_ = std::move(m); }

  RoundOutcome start_round(const std::vector<ClientRef>& members);

  // Assembles the aggregated model for this agent, applies the action-head
  // fine-tune over its awaiting history, loads it and ends the await.
  FinetuneReport deliver(rl::Agent& agent) const;

  // Convenience for a full synchronous round (collect, aggregate, deliver).
  RoundOutcome run_round(const std::vector<ClientRef>& members);

 private:
  std::string server_id_;
  GlobalModel model_;
  SelectionConfig cfg_;
  double server_cost_s_;
  Rng rng_;
};

// Cloud-tier exchange: every cluster model is treated as one participant
// with its members' mean loss attached to each of its bank heads, the same
// aggregation runs without a resident base, and the result replaces every
// cluster's model. Returns the merged model.
GlobalModel hierarchical_exchange(
    std::vector<std::pair<Coordinator*, double>> clusters_with_loss);

}  // namespace edgerl::fed
