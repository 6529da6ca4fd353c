#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgerl/fed/model.hpp"
#include "edgerl/rl/agent.hpp"

namespace edgerl::fed {

struct AggregationResult {
  GlobalModel model;
  // Normalized per-client weights actually used per bank, for reporting.
  std::map<HeadKey, std::vector<std::pair<std::string, double>>> bank_weights;
};

// Agent-specific aggregation. Backbone and value layers are averaged
// equally over base and clients: (base + sum(m_i)) / (|M|+1). Each head
// bank blends the base head at weight 1/(|M_d|+1) with the clients' heads
// at normalized inverse-loss weights. When `base` is null (cloud tier) the
// backbone/value are a plain client mean and banks are pure weighted means.
// Banks with no contributing client carry over unchanged. Order-independent
// in the update list. Throws std::invalid_argument on an empty update list.
AggregationResult aggregate(const GlobalModel* base,
                            const std::vector<ModelUpdate>& updates);

// Normalized inverse-loss weights: w_i = (1/(loss_i+1e-6)) normalized to
// sum 1. Losses are clamped to >= 0 first.
std::vector<double> inverse_loss_weights(const std::vector<double>& losses);

struct FinetuneReport {
  double loss = 0.0;
  std::size_t history_steps = 0;
  bool stepped = false;
};

// Action-head fine-tuning on awaiting-period history (client side): the
// policy over history states is computed with `candidate`, the loss is the
// mean joint negative log-likelihood of the history actions, and exactly
// one optimizer step touches the action heads; backbone and value stay
// bitwise intact. An empty history returns the candidate unchanged.
FinetuneReport finetune_heads(rl::AgentNetwork& candidate,
                              const std::vector<rl::HistoryStep>& history,
                              const rl::TrainConfig& cfg);

}  // namespace edgerl::fed
