#include "edgerl/fed/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace edgerl::fed {

void SelectionConfig::validate() const {
  if (w_mem < 0.0 || w_comp < 0.0 || w_div < 0.0)
    throw std::invalid_argument("selection weights must be >= 0");
  if (std::abs(w_mem + w_comp + w_div - 1.0) > 1e-9)
    throw std::invalid_argument("selection weights must sum to 1");
  if (participation_fraction <= 0.0 || participation_fraction > 1.0)
    throw std::invalid_argument("participation_fraction must be in (0, 1]");
  if (bandwidth_norm_mbps <= 0.0)
    throw std::invalid_argument("bandwidth_norm_mbps must be > 0");
}

double total_utility(double memory_availability, double compute_availability,
                     double data_diversity, double bandwidth_mbps,
                     const SelectionConfig& cfg) {
  if (bandwidth_mbps <= 0.0) return 0.0;
  const double util = cfg.w_mem * memory_availability +
                      cfg.w_comp * compute_availability +
                      cfg.w_div * data_diversity;
  return util * std::sqrt(bandwidth_mbps / cfg.bandwidth_norm_mbps);
}

std::vector<std::string> select_clients(const std::vector<Candidate>& candidates,
                                        const SelectionConfig& cfg, Rng&) {
  if (candidates.empty())
    throw std::invalid_argument("select_clients: no candidates");

  struct DeviceGroup {
    double utility_sum = 0.0;
    int budget = 1 << 20;
    std::vector<const Candidate*> agents;
  };
  std::map<std::string, DeviceGroup> devices;
  for (const Candidate& c : candidates) {
    DeviceGroup& g = devices[c.device];
    g.utility_sum += total_utility(c.memory_availability,
                                   c.compute_availability, c.data_diversity,
                                   c.bandwidth_mbps, cfg);
    g.budget = c.device_memory_budget;
    g.agents.push_back(&c);
  }

  std::vector<std::pair<std::string, const DeviceGroup*>> ranked;
  ranked.reserve(devices.size());
  for (const auto& [id, g] : devices) ranked.emplace_back(id, &g);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second->utility_sum != b.second->utility_sum)
      return a.second->utility_sum > b.second->utility_sum;
    return a.first < b.first;
  });

  const auto take = static_cast<std::size_t>(std::ceil(
      cfg.participation_fraction * static_cast<double>(ranked.size())));

  std::vector<std::string> selected;
  for (std::size_t d = 0; d < take && d < ranked.size(); ++d) {
    std::vector<const Candidate*> agents = ranked[d].second->agents;
    std::sort(agents.begin(), agents.end(),
              [](const Candidate* a, const Candidate* b) {
                if (a->memory_availability != b->memory_availability)
                  return a->memory_availability > b->memory_availability;
                return a->agent_id < b->agent_id;
              });
    const int budget = ranked[d].second->budget;
    for (std::size_t i = 0;
         i < agents.size() && static_cast<int>(i) < budget; ++i)
      selected.push_back(agents[i]->agent_id);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace edgerl::fed
