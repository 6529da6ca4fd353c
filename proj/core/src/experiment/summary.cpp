#include "edgerl/experiment/summary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgerl::experiment {

const char* const kMetricsHeader =
    "t,stage_id,throughput,effective_throughput,latency_mean,drops,"
    "violations,reward,loss,res_idx,bs_idx,mt_idx";

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<MetricsRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (line != kMetricsHeader)
        throw std::runtime_error(path.string() + ": unexpected CSV header");
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12)
      throw std::runtime_error(path.string() + ": malformed row: " + line);
    MetricsRow r;
    r.t = std::stod(cells[0]);
    r.stage_id = cells[1];
    r.throughput = std::stod(cells[2]);
    r.effective_throughput = std::stod(cells[3]);
    r.latency_mean = std::stod(cells[4]);
    r.drops = std::stol(cells[5]);
    r.violations = std::stol(cells[6]);
    r.reward = std::stod(cells[7]);
    r.loss = std::stod(cells[8]);
    r.res_idx = std::stoi(cells[9]);
    r.bs_idx = std::stoi(cells[10]);
    r.mt_idx = std::stoi(cells[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> episode_reward_series(const std::vector<MetricsRow>& rows,
                                          double episode_s) {
  std::vector<double> sums, counts;
  for (const MetricsRow& r : rows) {
    const auto idx = static_cast<std::size_t>(std::floor(r.t / episode_s));
    if (idx >= sums.size()) {
      sums.resize(idx + 1, 0.0);
      counts.resize(idx + 1, 0.0);
    }
    sums[idx] += r.reward;
    counts[idx] += 1.0;
  }
  std::vector<double> means;
  means.reserve(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i)
    means.push_back(counts[i] > 0.0 ? sums[i] / counts[i] : 0.0);
  return means;
}

nlohmann::json summarize(const std::filesystem::path& csv_path,
                         double episode_s, int trailing_episodes) {
  const std::vector<MetricsRow> rows = read_metrics_csv(csv_path);
  nlohmann::json out;
  if (rows.empty()) {
    out["mean_throughput"] = 0.0;
    out["mean_effective_throughput"] = 0.0;
    out["mean_latency_s"] = 0.0;
    out["effective_ratio"] = 0.0;
    out["final_reward_moving_average"] = 0.0;
    out["convergence_episode"] = 0;
    out["episodes"] = 0;
    out["rows"] = 0;
    out["warning"] = "empty metrics";
    return out;
  }

  double tp = 0.0, eff = 0.0, lat = 0.0;
  for (const MetricsRow& r : rows) {
    tp += r.throughput;
    eff += r.effective_throughput;
    lat += r.latency_mean;
  }
  const double n = static_cast<double>(rows.size());
  tp /= n;
  eff /= n;
  lat /= n;

  const std::vector<double> episodes = episode_reward_series(rows, episode_s);
  auto trailing_mean = [&](std::size_t end_idx) {
    const std::size_t window =
        std::min<std::size_t>(static_cast<std::size_t>(trailing_episodes), end_idx + 1);
    double sum = 0.0;
    for (std::size_t i = end_idx + 1 - window; i <= end_idx; ++i) sum += episodes[i];
    return sum / static_cast<double>(window);
  };

  const double final_avg = trailing_mean(episodes.size() - 1);
  int convergence = static_cast<int>(episodes.size());
  const double tol = 0.05 * std::max(std::abs(final_avg), 1e-12);
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    if (std::abs(trailing_mean(e) - final_avg) <= tol) {
      convergence = static_cast<int>(e) + 1;  // 1-based episode index
      break;
    }
  }

  out["mean_throughput"] = tp;
  out["mean_effective_throughput"] = eff;
  out["mean_latency_s"] = lat;
  out["effective_ratio"] = tp > 0.0 ? eff / tp : 0.0;
  out["final_reward_moving_average"] = final_avg;
  out["convergence_episode"] = convergence;
  out["episodes"] = episodes.size();
  out["rows"] = rows.size();
  return out;
}

}  // namespace edgerl::experiment
