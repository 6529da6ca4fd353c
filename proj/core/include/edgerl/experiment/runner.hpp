#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "edgerl/experiment/config.hpp"

namespace edgerl::experiment {

struct AgentEvents {
  long updates = 0;          // update() calls (gated or not)
  long updates_applied = 0;  // updates that actually stepped the optimizer
  long rounds = 0;           // federated rounds this agent participated in
  long finetunes = 0;        // head fine-tunes after a delivery
};

struct RunArtifacts {
  std::filesystem::path out_dir;
  std::filesystem::path metrics_csv;
  std::filesystem::path rounds_jsonl;
  std::filesystem::path summary_path;
  std::filesystem::path events_path;
  std::filesystem::path checkpoint_dir;
  nlohmann::json summary;
  std::map<std::string, AgentEvents> events;
  int rounds_started = 0;
  int rounds_skipped = 0;
  int cloud_rounds = 0;
};

// Executes a validated config: the per-tick stage simulation, per-period
// agent decisions, per-episode gated updates and federated rounds on their
// cadence. All artifacts land under out_dir and are byte-identical for
// identical (config, seed). Throws std::runtime_error with the failing tick
// and agent on a mid-run numeric failure.
RunArtifacts run(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir);

}  // namespace edgerl::experiment
