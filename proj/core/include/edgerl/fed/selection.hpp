#pragma once

#include <string>
#include <vector>

#include "edgerl/rng.hpp"

namespace edgerl::fed {

struct SelectionConfig {
  double participation_fraction = 1.0;  // fraction of devices per round
  double w_mem = 1.0 / 3.0;
  double w_comp = 1.0 / 3.0;
  double w_div = 1.0 / 3.0;
  double bandwidth_norm_mbps = 10.0;

  void validate() const;  // weights >= 0 summing to 1, fraction in (0, 1]
};

// Utility of one client: (w_mem*mem + w_comp*comp + w_div*div) scaled by
// sqrt(bandwidth / 10 Mbit/s). Non-positive bandwidth scores 0.
double total_utility(double memory_availability, double compute_availability,
                     double data_diversity, double bandwidth_mbps,
                     const SelectionConfig& cfg);

struct Candidate {
  std::string agent_id;
  std::string device;
  double memory_availability = 0.0;
  double compute_availability = 0.0;
  double data_diversity = 0.0;
  double bandwidth_mbps = 0.0;
  int device_memory_budget = 1 << 20;
};

// Two-level selection: devices are ranked by their agents' summed utility
// and the top participation fraction is chosen (ties: lexicographically
// smaller device id); within a chosen device, agents are admitted in
// descending memory availability (ties: smaller agent id) up to the
// device's memory budget. Deterministic given the inputs.
std::vector<std::string> select_clients(const std::vector<Candidate>& candidates,
                                        const SelectionConfig& cfg, Rng& rng);

}  // namespace edgerl::fed
