#include "edgerl/sim/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace edgerl::sim {

Pipeline::Pipeline(std::string name, double slo_s)
    : name_(std::move(name)), slo_s_(slo_s) {
  if (slo_s <= 0.0) throw std::invalid_argument("pipeline " + name_ + ": SLO <= 0");
}

void Pipeline::add_stage(Stage stage, double fan_out) {
  if (fan_out <= 0.0)
    throw std::invalid_argument("pipeline " + name_ + ": fan_out <= 0");
  stages_.push_back(std::move(stage));
  fan_out_.push_back(fan_out);
  fan_out_credit_.push_back(0.0);
}

double Pipeline::stage_budget(std::size_t i) const {
  return slo_s_ * static_cast<double>(i + 1) /
         static_cast<double>(stages_.size());
}

PipelineTick Pipeline::step(int source_arrivals, double t, double dt,
                            Rng& jitter_rng) {
  if (stages_.empty())
    throw std::logic_error("pipeline " + name_ + ": no stages");
  PipelineTick tick;
  tick.source_arrivals = source_arrivals;
  tick.stages.reserve(stages_.size());

  std::vector<StageOutput> handoff;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    Stage& stage = stages_[i];
    long arrivals = 0;
    long drops = 0;
    if (i == 0) {
      arrivals = source_arrivals;
      drops = stage.enqueue_external(source_arrivals, t, dt, jitter_rng);
    } else {
      arrivals = static_cast<long>(handoff.size());
      drops = stage.enqueue_upstream(handoff);
    }
    StepMetrics m = stage.step(t, dt);
    m.arrivals = arrivals;
    m.drops = drops;

    // Fan-out: each result is replicated for the downstream stage, with a
    // fractional credit so non-integer multipliers stay deterministic.
    handoff.clear();
    if (i + 1 < stages_.size()) {
      double& credit = fan_out_credit_[i];
      for (const StageOutput& out : m.outputs) {
        credit += fan_out_[i];
        while (credit >= 1.0) {
          handoff.push_back(out);
          credit -= 1.0;
        }
      }
    } else {
      double lat_sum = 0.0;
      for (const StageOutput& out : m.outputs) {
        const double lat = out.completed - out.birth;
        lat_sum += lat;
        if (lat > slo_s_) ++tick.e2e_violations;
      }
      const long n = static_cast<long>(m.outputs.size());
      tick.e2e_throughput = static_cast<double>(n) / dt;
      tick.e2e_effective_throughput =
          static_cast<double>(n - tick.e2e_violations) / dt;
      tick.e2e_latency_mean = n > 0 ? lat_sum / static_cast<double>(n) : 0.0;
    }
    tick.stages.push_back(std::move(m));
  }
  return tick;
}

}  // namespace edgerl::sim
