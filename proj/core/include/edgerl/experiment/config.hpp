#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgerl/fed/selection.hpp"
#include "edgerl/rl/types.hpp"
#include "edgerl/sim/stage.hpp"
#include "edgerl/sim/trace.hpp"

namespace edgerl::experiment {

enum class AgentMode {
  kLearning,    // continual updates + federation
  kFrozen,      // decides from its (loaded) policy, never updates
  kFixed,       // static median configuration, no agent at all
  kBlank,       // learning from scratch, ignores any init (cold start)
  kSingleHead,  // learning with the joint-head ablation network
};

std::string to_string(AgentMode mode);
std::optional<AgentMode> agent_mode_from_string(const std::string& s);

struct StageConfig {
  std::string device;
  double fan_out = 1.0;
  rl::ActionSpaceSpec action_space;
};

struct PipelineConfig {
  std::string name;
  std::string trace;
  double slo_s = 0.25;
  AgentMode mode = AgentMode::kLearning;
  std::vector<StageConfig> stages;
  // Optional warm starts: a directory of per-agent checkpoints written by an
  // earlier run (matched by source pipeline name and stage index), or a
  // global-model checkpoint assembled per agent.
  std::string init_agent_dir;
  std::string init_agent_pipeline;
  std::string init_global;
};

struct FederationConfig {
  bool enabled = false;
  int cadence_episodes = 2;
  double server_cost_s = 1.0;
  fed::SelectionConfig selection;
};

struct ClusterConfig {
  std::string server;
  std::vector<std::string> members;  // agent ids: "<pipeline>/<stage index>"
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double dt_s = 0.1;
  double decision_period_s = 1.0;
  std::vector<sim::DeviceProfile> devices;
  std::vector<sim::WorkloadTrace> traces;
  std::vector<PipelineConfig> pipelines;
  rl::TrainConfig train;
  FederationConfig federation;
  std::vector<ClusterConfig> clusters;  // empty: one cluster of all agents
  int local_rounds_per_cloud_round = 1;

  int ticks_per_decision() const;
  const sim::DeviceProfile* find_device(const std::string& name) const;
  const sim::WorkloadTrace* find_trace(const std::string& name) const;
};

struct ValidationError {
  std::string field;
  std::string message;
};

struct LoadResult {
  std::optional<ExperimentConfig> config;
  std::vector<ValidationError> errors;

  bool ok() const { return config.has_value() && errors.empty(); }
};

// Parses and fully validates; on failure every detected problem is listed
// (unknown keys included — misspellings never fall back to defaults).
LoadResult parse_config(const nlohmann::json& j);
LoadResult load_config(const std::filesystem::path& path);

// Round-trippable echo of a config (parse_config(to_json(c)) == c).
nlohmann::json to_json(const ExperimentConfig& cfg);

nlohmann::json errors_to_json(const std::vector<ValidationError>& errors);

}  // namespace edgerl::experiment
