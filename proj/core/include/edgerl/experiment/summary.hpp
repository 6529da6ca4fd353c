#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace edgerl::experiment {

// Parsed per-tick metrics rows (one per stage per tick).
struct MetricsRow {
  double t = 0.0;
  std::string stage_id;
  double throughput = 0.0;
  double effective_throughput = 0.0;
  double latency_mean = 0.0;
  long drops = 0;
  long violations = 0;
  double reward = 0.0;
  double loss = 0.0;
  int res_idx = 0;
  int bs_idx = 0;
  int mt_idx = 0;
};

extern const char* const kMetricsHeader;

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

// Mean reward per fixed-length episode window (pooled over stages).
std::vector<double> episode_reward_series(const std::vector<MetricsRow>& rows,
                                          double episode_s);

// Column means, effective/total throughput ratio, the trailing-window final
// reward average and the convergence episode (first episode whose trailing
// mean lands within 5% of the run's final trailing mean). An empty CSV
// yields zeros plus a warning flag.
nlohmann::json summarize(const std::filesystem::path& csv_path,
                         double episode_s = 10.0, int trailing_episodes = 10);

}  // namespace edgerl::experiment
