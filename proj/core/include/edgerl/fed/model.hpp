#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgerl/rl/network.hpp"
#include "edgerl/rng.hpp"

namespace edgerl::fed {

// Action heads are only comparable when they share role and shape, so banks
// key on all three. Roles are "res", "bs", "mt".
struct HeadKey {
  std::string role;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;

  auto operator<=>(const HeadKey&) const = default;
  std::string str() const {
    return role + "/" + std::to_string(in_dim) + "x" + std::to_string(out_dim);
  }
};

// Server-side state: a canonical base network (backbone + value head) plus
// one aggregated action head per distinct head shape seen so far.
struct GlobalModel {
  nn::LayerParams layer1;  // 8 -> 64
  nn::LayerParams layer2;  // 64 -> 48
  nn::LayerParams value;   // 48 -> 1
  std::map<HeadKey, nn::LayerParams> banks;

  static GlobalModel init(Rng& rng);
};

struct HeadUpdate {
  nn::LayerParams head;
  double loss = 0.0;  // nonnegative policy-loss magnitude for this head
};

// One aggregation participant: a client agent, or a whole cluster model when
// aggregating at the cloud tier.
struct ModelUpdate {
  std::string id;
  nn::LayerParams layer1, layer2, value;
  std::map<HeadKey, HeadUpdate> heads;
};

// Client payload for one round: the serialized model plus the device and
// buffer statistics that drive selection.
struct ClientUpdate {
  std::string agent_id;
  std::string device;
  ModelUpdate model;
  std::size_t payload_bytes = 0;
  double memory_availability = 0.0;
  double compute_availability = 0.0;
  double data_diversity = 0.0;  // mean diversity of the agent's buffer
  double bandwidth_mbps = 0.0;
};

std::vector<HeadKey> head_keys(const rl::AgentNetwork& net);

// Builds a ModelUpdate from a cascade network and its per-head loss report
// magnitudes (res, bs, mt order).
ModelUpdate model_update_from(const std::string& id,
                              const rl::AgentNetwork& net,
                              const std::vector<double>& per_head_loss);

// Backbone and value come from the global model; each action head is taken
// from the matching bank when present, otherwise kept from `current`.
rl::AgentNetwork assemble_for_agent(const GlobalModel& global,
                                    const rl::AgentNetwork& current);

}  // namespace edgerl::fed
