#include "edgerl/sim/stage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgerl::sim {

void DeviceProfile::validate() const {
  if (base_latency_s <= 0.0 || per_item_latency_s <= 0.0 ||
      preproc_cost_s <= 0.0 || postproc_cost_s <= 0.0)
    throw std::invalid_argument("device " + name + ": latencies must be > 0");
  if (cores < 1 || max_threads < 1)
    throw std::invalid_argument("device " + name + ": cores/threads must be >= 1");
  if (max_batch < 1)
    throw std::invalid_argument("device " + name + ": max_batch must be >= 1");
  if (queue_capacity < 1)
    throw std::invalid_argument("device " + name + ": queue_capacity must be >= 1");
  if (memory_availability < 0.0 || memory_availability > 1.0 ||
      compute_availability < 0.0 || compute_availability > 1.0)
    throw std::invalid_argument("device " + name +
                                ": availability fractions must be in [0, 1]");
  if (bandwidth_mbps <= 0.0)
    throw std::invalid_argument("device " + name + ": bandwidth must be > 0");
}

double contention(int threads, int cores) {
  if (threads <= cores) return 1.0;
  return static_cast<double>(cores) / static_cast<double>(threads);
}

Stage::Stage(std::string id, DeviceProfile device, rl::ActionSpaceSpec spec,
             rl::Action initial, double slo_budget_s, double flush_wait_s)
    : id_(std::move(id)),
      device_(std::move(device)),
      spec_(std::move(spec)),
      action_(initial),
      slo_budget_s_(slo_budget_s),
      flush_wait_s_(flush_wait_s) {
  device_.validate();
  spec_.validate();
  action_.validate(spec_);
  if (spec_.bs_choices.back() > device_.max_batch)
    throw std::invalid_argument("stage " + id_ +
                                ": batch choices exceed device max_batch");
  if (spec_.mt_choices.back() > device_.max_threads)
    throw std::invalid_argument("stage " + id_ +
                                ": thread choices exceed device max_threads");
}

double Stage::max_service_rate() const {
  const int max_bs = spec_.bs_choices.back();
  const int max_rho = spec_.res_choices.back();
  return static_cast<double>(max_rho) * max_bs / device_.batch_latency(max_bs);
}

double Stage::preproc_service_time() const {
  const int mt = threads();
  return device_.preproc_cost_s / (mt * contention(mt, device_.cores));
}

double Stage::postproc_service_time() const {
  const int mt = threads();
  return device_.postproc_cost_s / (mt * contention(mt, device_.cores));
}

long Stage::enqueue_external(int count, double t, double dt, Rng& rng) {
  if (count <= 0) return 0;
  std::vector<double> offsets(static_cast<std::size_t>(count));
  for (double& o : offsets) o = rng.uniform() * dt;
  std::sort(offsets.begin(), offsets.end());
  long drops = 0;
  for (double o : offsets) {
    if (static_cast<int>(preproc_.size()) >= device_.queue_capacity) {
      ++drops;
      continue;
    }
    const double at = t + o;
    preproc_.push_back(Frame{at, at, at});
  }
  total_drops_ += drops;
  return drops;
}

long Stage::enqueue_upstream(const std::vector<StageOutput>& results) {
  long drops = 0;
  for (const StageOutput& r : results) {
    if (static_cast<int>(preproc_.size()) >= device_.queue_capacity) {
      ++drops;
      continue;
    }
    preproc_.push_back(Frame{r.birth, r.completed, r.completed});
  }
  total_drops_ += drops;
  return drops;
}

bool Stage::staging_has_room() const {
  return static_cast<int>(staging_.size()) < device_.queue_capacity;
}

void Stage::run_preproc(double tick_end) {
  const double service = preproc_service_time();
  const int rho = packing_factor();
  while (!preproc_.empty()) {
    if (!staging_has_room()) break;
    Frame f = preproc_.front();
    const double start = std::max(pre_free_, f.ready);
    const double done = start + service;
    if (done > tick_end) break;
    preproc_.pop_front();
    pre_free_ = done;
    f.ready = done;
    open_pack_.push_back(f);
    if (static_cast<int>(open_pack_.size()) >= rho) {
      staging_.push_back(PackedItem{std::move(open_pack_), done});
      open_pack_.clear();
    }
  }
}

void Stage::flush_open_pack(double tick_end) {
  if (open_pack_.empty() || !staging_has_room()) return;
  if (tick_end - open_pack_.front().ready <= flush_wait_s_) return;
  const double ready = open_pack_.back().ready;
  staging_.push_back(PackedItem{std::move(open_pack_), ready});
  open_pack_.clear();
}

void Stage::run_inference(double tick_end) {
  const int bs = batch_size();
  while (!staging_.empty()) {
    int take = 0;
    if (static_cast<int>(staging_.size()) >= bs) {
      take = bs;
    } else if (tick_end - staging_.front().ready > flush_wait_s_) {
      take = static_cast<int>(staging_.size());  // partial flush
    } else {
      break;
    }
    double batch_ready = 0.0;
    long frames = 0;
    for (int i = 0; i < take; ++i) {
      batch_ready = std::max(batch_ready, staging_[static_cast<std::size_t>(i)].ready);
      frames += static_cast<long>(staging_[static_cast<std::size_t>(i)].frames.size());
    }
    const double start = std::max(inf_free_, batch_ready);
    const double done = start + device_.batch_latency(take);
    if (done > tick_end) break;
    if (static_cast<long>(postproc_.size()) + frames > device_.queue_capacity)
      break;  // backpressure: hold the batch until postprocessing drains
    inf_free_ = done;
    for (int i = 0; i < take; ++i) {
      PackedItem& item = staging_.front();
      for (Frame& f : item.frames) {
        f.ready = done;
        postproc_.push_back(f);
      }
      staging_.pop_front();
    }
  }
}

void Stage::run_postproc(double tick_end, StepMetrics& m) {
  const double service = postproc_service_time();
  while (!postproc_.empty()) {
    Frame f = postproc_.front();
    const double start = std::max(post_free_, f.ready);
    const double done = start + service;
    if (done > tick_end) break;
    postproc_.pop_front();
    post_free_ = done;
    const double accumulated = done - f.birth;
    m.outputs.push_back(StageOutput{f.birth, done});
    ++m.completions;
    m.latency_mean += accumulated;
    m.local_latency_mean += done - f.stage_entry;
    if (accumulated > slo_budget_s_) ++m.violations;
  }
}

StepMetrics Stage::step(double t, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("Stage::step: dt <= 0");
  const double tick_end = t + dt;
  StepMetrics m;
  run_preproc(tick_end);
  flush_open_pack(tick_end);
  run_inference(tick_end);
  run_postproc(tick_end, m);
  if (m.completions > 0) {
    m.latency_mean /= static_cast<double>(m.completions);
    m.local_latency_mean /= static_cast<double>(m.completions);
  }
  m.throughput = static_cast<double>(m.completions) / dt;
  m.effective_throughput =
      static_cast<double>(m.completions - m.violations) / dt;
  return m;
}

void Stage::apply_action(const rl::Action& a) {
  a.validate(spec_);
  action_ = a;
}

rl::State Stage::observe(double window_arrival_rate, long window_drops,
                         long window_arrivals, double slo_s) const {
  rl::State s;
  s.arrival_rate = window_arrival_rate / max_service_rate();
  s.queue_drops = window_arrivals > 0
                      ? static_cast<double>(window_drops) /
                            static_cast<double>(window_arrivals)
                      : 0.0;
  const auto level = [](int idx, std::size_t n) {
    return n > 1 ? static_cast<double>(idx) / static_cast<double>(n - 1) : 0.0;
  };
  s.res_level = level(action_.res_idx, spec_.res_choices.size());
  s.bs_level = level(action_.bs_idx, spec_.bs_choices.size());
  s.mt_level = level(action_.mt_idx, spec_.mt_choices.size());
  s.preproc_fill = preproc_fill();
  s.postproc_fill = postproc_fill();
  s.slo = slo_s / 1.0;
  return s;
}

double Stage::preproc_fill() const {
  return std::min(1.0, static_cast<double>(preproc_.size()) /
                           static_cast<double>(device_.queue_capacity));
}

double Stage::postproc_fill() const {
  return std::min(1.0, static_cast<double>(postproc_.size()) /
                           static_cast<double>(device_.queue_capacity));
}

long Stage::queued_frames() const {
  long n = static_cast<long>(preproc_.size()) +
           static_cast<long>(open_pack_.size()) +
           static_cast<long>(postproc_.size());
  for (const PackedItem& item : staging_)
    n += static_cast<long>(item.frames.size());
  return n;
}

}  // namespace edgerl::sim
