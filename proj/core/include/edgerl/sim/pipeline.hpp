#pragma once

#include <string>
#include <vector>

#include "edgerl/sim/stage.hpp"
#include "edgerl/sim/trace.hpp"

namespace edgerl::sim {

// End-to-end pipeline accounting at the sink.
struct PipelineTick {
  std::vector<StepMetrics> stages;
  double e2e_throughput = 0.0;
  double e2e_effective_throughput = 0.0;
  double e2e_latency_mean = 0.0;
  long e2e_violations = 0;
  int source_arrivals = 0;
};

// Ordered stages wired source to sink. A stage's completed results, scaled
// by its fan-out (objects per frame), feed the next stage within the same
// tick, carrying their accumulated latency.
class Pipeline {
 public:
  Pipeline(std::string name, double slo_s);

  void add_stage(Stage stage, double fan_out);

  const std::string& name() const { return name_; }
  double slo() const { return slo_s_; }
  std::size_t stage_count() const { return stages_.size(); }
  Stage& stage(std::size_t i) { return stages_[i]; }
  const Stage& stage(std::size_t i) const { return stages_[i]; }

  // Advances every stage across [t, t+dt). source_arrivals fresh frames
  // enter stage 0 with jittered sub-tick timestamps.
  PipelineTick step(int source_arrivals, double t, double dt, Rng& jitter_rng);

  // Violation budget for stage i: the end-to-end SLO scaled to the share of
  // the pipeline a result has traversed by the end of that stage.
  double stage_budget(std::size_t i) const;

 private:
  std::string name_;
  double slo_s_;
  std::vector<Stage> stages_;
  std::vector<double> fan_out_;
  std::vector<double> fan_out_credit_;
};

}  // namespace edgerl::sim
