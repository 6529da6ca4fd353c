#include "edgerl/fed/coordinator.hpp"

#include <stdexcept>

#include "edgerl/rl/serialize.hpp"

namespace edgerl::fed {

Coordinator::Coordinator(std::string server_id, GlobalModel initial,
                         SelectionConfig cfg, double server_cost_s,
                         std::uint64_t seed)
    : server_id_(std::move(server_id)),
      model_(std::move(initial)),
      cfg_(cfg),
      server_cost_s_(server_cost_s),
      rng_(seed) {
  cfg_.validate();
}

RoundOutcome Coordinator::start_round(const std::vector<ClientRef>& members) {
  RoundOutcome outcome;
  if (members.empty()) {
    outcome.skipped = true;
    return outcome;
  }

  std::vector<Candidate> candidates;
  candidates.reserve(members.size());
  for (const ClientRef& ref : members) {
    candidates.push_back(Candidate{
        ref.agent->id(), ref.device->name, ref.device->memory_availability,
        ref.device->compute_availability,
        ref.agent->diversity_buffer().mean_diversity(),
        ref.device->bandwidth_mbps, ref.device->fl_memory_budget});
  }
  outcome.participants = select_clients(candidates, cfg_, rng_);
  if (outcome.participants.empty()) {
    outcome.skipped = true;
    return outcome;
  }

  std::vector<ModelUpdate> updates;
  updates.reserve(outcome.participants.size());
  for (const std::string& id : outcome.participants) {
    const ClientRef* ref = nullptr;
    for (const ClientRef& r : members)
      if (r.agent->id() == id) ref = &r;
    if (!ref) throw std::logic_error("selected unknown client " + id);

    updates.push_back(model_update_from(id, ref->agent->network(),
                                        ref->agent->last_report().per_head));
    const std::size_t payload =
        rl::serialize_network(ref->agent->network()).size();
    outcome.payload_bytes_total += payload;
    // Upload plus download of the same-sized payload.
    outcome.latency_s += 2.0 * static_cast<double>(payload) * 8.0 /
                         (ref->device->bandwidth_mbps * 1e6);
  }
  outcome.latency_s += server_cost_s_;

  AggregationResult result = aggregate(&model_, updates);
  model_ = std::move(result.model);
  outcome.bank_weights = std::move(result.bank_weights);
  return outcome;
}

FinetuneReport Coordinator::deliver(rl::Agent& agent) const {
  rl::AgentNetwork candidate = assemble_for_agent(model_, agent.network());
  const FinetuneReport report =
      finetune_heads(candidate, agent.history(), agent.config());
  agent.load_network(std::move(candidate));
  agent.end_await();
  return report;
}

RoundOutcome Coordinator::run_round(const std::vector<ClientRef>& members) {
  RoundOutcome outcome = start_round(members);
  if (outcome.skipped) return outcome;
  for (const std::string& id : outcome.participants)
    for (const ClientRef& r : members)
      if (r.agent->id() == id) deliver(*r.agent);
  return outcome;
}

GlobalModel hierarchical_exchange(
    std::vector<std::pair<Coordinator*, double>> clusters_with_loss) {
  if (clusters_with_loss.empty())
    throw std::invalid_argument("hierarchical_exchange: no clusters");

  std::vector<ModelUpdate> updates;
  updates.reserve(clusters_with_loss.size());
  for (const auto& [coordinator, mean_loss] : clusters_with_loss) {
    const GlobalModel& m = coordinator->model();
    ModelUpdate u;
    u.id = coordinator->server_id();
    u.layer1 = m.layer1;
    u.layer2 = m.layer2;
    u.value = m.value;
    for (const auto& [key, head] : m.banks)
      u.heads.emplace(key, HeadUpdate{head, std::max(mean_loss, 0.0)});
    updates.push_back(std::move(u));
  }

  AggregationResult result = aggregate(nullptr, updates);
  for (auto& [coordinator, mean_loss] : clusters_with_loss)
    coordinator->set_model(result.model);
  return result.model;
}

}  // namespace edgerl::fed
