#pragma once

#include <deque>
#include <string>
#include <vector>

#include "edgerl/rl/types.hpp"
#include "edgerl/rng.hpp"

namespace edgerl::sim {

// Parametric device behavior. Inference of a batch of B items costs
// base_latency_s + per_item_latency_s * B; pre/post-processing cost is per
// frame/result and scales with threads until core contention bites.
struct DeviceProfile {
  std::string name;
  double base_latency_s = 0.01;      // b
  double per_item_latency_s = 0.002; // k
  double preproc_cost_s = 0.004;     // p, per frame per thread
  double postproc_cost_s = 0.003;    // q, per result per thread
  int cores = 4;                     // C
  int max_threads = 8;
  int max_batch = 16;
  int queue_capacity = 64;           // per queue

  // Federation-selection attributes.
  double memory_availability = 0.5;
  double compute_availability = 0.5;
  double bandwidth_mbps = 10.0;
  int fl_memory_budget = 1 << 20;  // max agents admitted per round

  void validate() const;
  double batch_latency(int batch_size) const {
    return base_latency_s + per_item_latency_s * batch_size;
  }
};

// 1 while threads fit the cores, then degrades as cores/threads.
double contention(int threads, int cores);

// One finished result leaving a stage.
struct StageOutput {
  double birth = 0.0;       // when the source frame entered the pipeline
  double completed = 0.0;   // postprocessing finish time
};

// Per-tick stage accounting.
struct StepMetrics {
  double throughput = 0.0;            // results per second this tick
  double effective_throughput = 0.0;  // results within the SLO budget
  double latency_mean = 0.0;          // mean accumulated latency of results
  double local_latency_mean = 0.0;    // mean time spent inside this stage
  long drops = 0;
  long violations = 0;
  long arrivals = 0;     // frames offered this tick (accepted + dropped)
  long completions = 0;  // results finished this tick
  std::vector<StageOutput> outputs;
};

// One simulated inference stage: bounded preprocessing queue, frame packing,
// batched inference, bounded postprocessing queue. Service is modeled with
// per-phase virtual server clocks, so items carry exact sub-tick timestamps
// and a frame can traverse the whole stage within a single tick.
class Stage {
 public:
  Stage(std::string id, DeviceProfile device, rl::ActionSpaceSpec spec,
        rl::Action initial, double slo_budget_s, double flush_wait_s);

  const std::string& id() const { return id_; }
  const DeviceProfile& device() const { return device_; }
  const rl::ActionSpaceSpec& action_space() const { return spec_; }
  const rl::Action& current_action() const { return action_; }

  int packing_factor() const { return spec_.res_choices[action_.res_idx]; }
  int batch_size() const { return spec_.bs_choices[action_.bs_idx]; }
  int threads() const { return spec_.mt_choices[action_.mt_idx]; }
  double current_batch_latency() const {
    return device_.batch_latency(batch_size());
  }
  // Highest sustainable frame rate of this stage's action space (largest
  // packing factor at the largest batch). Normalizes the observed rate.
  double max_service_rate() const;

  // Queues fresh frames arriving uniformly over [t, t+dt); returns drops.
  long enqueue_external(int count, double t, double dt, Rng& rng);
  // Queues frames handed over from the upstream stage; returns drops.
  long enqueue_upstream(const std::vector<StageOutput>& results);

  // Advances the stage across [t, t+dt).
  StepMetrics step(double t, double dt);

  // Reconfigures before the next tick; queue contents are preserved.
  // Throws std::out_of_range on an invalid index.
  void apply_action(const rl::Action& a);

  // Builds the normalized observation from a decision window.
  rl::State observe(double window_arrival_rate, long window_drops,
                    long window_arrivals, double slo_s) const;

  double preproc_fill() const;
  double postproc_fill() const;
  // Frames resident in any internal queue (preproc, packing, staging,
  // postproc), for conservation checks.
  long queued_frames() const;
  long total_drops() const { return total_drops_; }

 private:
  struct Frame {
    double birth;
    double stage_entry;
    double ready;
  };
  struct PackedItem {
    std::vector<Frame> frames;
    double ready;
  };

  double preproc_service_time() const;
  double postproc_service_time() const;
  bool staging_has_room() const;
  void run_preproc(double tick_end);
  void flush_open_pack(double tick_end);
  void run_inference(double tick_end);
  void run_postproc(double tick_end, StepMetrics& m);

  std::string id_;
  DeviceProfile device_;
  rl::ActionSpaceSpec spec_;
  rl::Action action_;
  double slo_budget_s_;   // accumulated-latency budget for violation counts
  double flush_wait_s_;   // partial pack/batch flush threshold

  std::deque<Frame> preproc_;
  std::vector<Frame> open_pack_;
  std::deque<PackedItem> staging_;
  std::deque<Frame> postproc_;
  double pre_free_ = 0.0;
  double inf_free_ = 0.0;
  double post_free_ = 0.0;
  long total_drops_ = 0;
};

}  // namespace edgerl::sim
