#include "edgerl/experiment/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "edgerl/experiment/summary.hpp"
#include "edgerl/fed/coordinator.hpp"
#include "edgerl/fed/serialize.hpp"
#include "edgerl/rl/agent.hpp"
#include "edgerl/rl/serialize.hpp"
#include "edgerl/sim/pipeline.hpp"

namespace edgerl::experiment {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kMinRequestRate = 1e-3;

// RNG stream tags (arbitrary distinct constants).
constexpr std::uint64_t kStreamTrace = 0x7261;
constexpr std::uint64_t kStreamJitter = 0x6a69;
constexpr std::uint64_t kStreamAgent = 0x6167;
constexpr std::uint64_t kStreamServer = 0x7365;

int median_index(std::size_t n) { return static_cast<int>((n - 1) / 2); }

struct WindowStats {
  long arrivals = 0;
  long drops = 0;
  long completions = 0;
  long violations = 0;
  double local_latency_sum = 0.0;  // weighted by completions

  void reset() { *this = WindowStats{}; }
};

struct StageRuntime {
  std::string agent_id;
  AgentMode mode = AgentMode::kFixed;
  std::unique_ptr<rl::Agent> agent;  // null in fixed mode
  const sim::DeviceProfile* device = nullptr;
  WindowStats window;
  double last_reward = 0.0;
  double last_loss = 0.0;
  // The decision whose outcome the elapsed window measures.
  std::optional<std::pair<rl::State, rl::Decision>> pending;
  long decisions = 0;
};

struct PipelineRuntime {
  const PipelineConfig* config = nullptr;
  std::unique_ptr<sim::Pipeline> pipeline;
  const sim::WorkloadTrace* trace = nullptr;
  std::unique_ptr<Rng> trace_rng;
  std::unique_ptr<Rng> jitter_rng;
  std::vector<StageRuntime> stages;
};

struct ClusterRuntime {
  std::string server_id;
  std::unique_ptr<fed::Coordinator> coordinator;
  std::vector<std::pair<std::size_t, std::size_t>> members;  // (pipeline, stage)
  bool in_flight = false;
  double deliver_at = 0.0;
  std::vector<std::string> participants;
  int local_rounds_done = 0;
};

bool trains(AgentMode mode) {
  return mode == AgentMode::kLearning || mode == AgentMode::kBlank ||
         mode == AgentMode::kSingleHead;
}

bool federates(AgentMode mode) {
  return mode == AgentMode::kLearning || mode == AgentMode::kBlank;
}

std::string checkpoint_name(const std::string& pipeline, std::size_t stage) {
  return pipeline + "-s" + std::to_string(stage) + ".bin";
}

void write_csv_row(std::FILE* f, double t, const std::string& stage_id,
                   const sim::StepMetrics& m, double reward, double loss,
                   const rl::Action& action) {
  std::fprintf(f, "%.3f,%s,%.9g,%.9g,%.9g,%ld,%ld,%.9g,%.9g,%d,%d,%d\n", t,
               stage_id.c_str(), m.throughput, m.effective_throughput,
               m.latency_mean, m.drops, m.violations, reward, loss,
               action.res_idx, action.bs_idx, action.mt_idx);
}

}  // namespace

RunArtifacts run(const ExperimentConfig& cfg, const fs::path& out_dir) {
  RunArtifacts artifacts;
  artifacts.out_dir = out_dir;
  artifacts.metrics_csv = out_dir / "metrics.csv";
  artifacts.rounds_jsonl = out_dir / "rounds.jsonl";
  artifacts.summary_path = out_dir / "summary.json";
  artifacts.events_path = out_dir / "events.json";
  artifacts.checkpoint_dir = out_dir / "checkpoints";
  fs::create_directories(artifacts.checkpoint_dir);

  const double dt = cfg.dt_s;
  const int tpd = cfg.ticks_per_decision();
  const long total_ticks = static_cast<long>(std::llround(cfg.duration_s / dt));

  // --- Build runtimes -------------------------------------------------
  std::vector<PipelineRuntime> pipelines;
  pipelines.reserve(cfg.pipelines.size());
  std::size_t agent_counter = 0;
  for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
    const PipelineConfig& pc = cfg.pipelines[pi];
    PipelineRuntime rt;
    rt.config = &pc;
    rt.trace = cfg.find_trace(pc.trace);
    rt.pipeline = std::make_unique<sim::Pipeline>(pc.name, pc.slo_s);
    rt.trace_rng = std::make_unique<Rng>(derive_seed(
        derive_seed(cfg.seed, (kStreamTrace << 32) + pi), rt.trace->seed));
    rt.jitter_rng = std::make_unique<Rng>(
        derive_seed(cfg.seed, (kStreamJitter << 32) + pi));

    for (std::size_t si = 0; si < pc.stages.size(); ++si) {
      const StageConfig& sc = pc.stages[si];
      const sim::DeviceProfile* dev = cfg.find_device(sc.device);
      StageRuntime srt;
      srt.agent_id = pc.name + "/" + std::to_string(si);
      srt.mode = pc.mode;
      srt.device = dev;

      rl::Action initial{};
      if (pc.mode == AgentMode::kFixed) {
        initial = rl::Action{median_index(sc.action_space.res_choices.size()),
                             median_index(sc.action_space.bs_choices.size()),
                             median_index(sc.action_space.mt_choices.size())};
      } else {
        const rl::HeadLayout layout = pc.mode == AgentMode::kSingleHead
                                          ? rl::HeadLayout::kSingleHead
                                          : rl::HeadLayout::kCascade;
        srt.agent = std::make_unique<rl::Agent>(
            srt.agent_id, sc.action_space, cfg.train, layout,
            derive_seed(cfg.seed, (kStreamAgent << 32) + agent_counter));
        // Warm starts. Blank mode deliberately ignores any init source.
        if (pc.mode != AgentMode::kBlank) {
          if (!pc.init_agent_dir.empty()) {
            const fs::path path = fs::path(pc.init_agent_dir) /
                                  checkpoint_name(pc.init_agent_pipeline, si);
            srt.agent->load_network(rl::load_network(path));
          } else if (!pc.init_global.empty()) {
            const fed::GlobalModel global = fed::load_global(pc.init_global);
            srt.agent->load_network(
                fed::assemble_for_agent(global, srt.agent->network()));
          }
        }
      }
      ++agent_counter;

      // Budget for violation counting: the SLO share covered by stage si.
      // Agent stages start from the cheapest configuration; the first
      // decision replaces it before tick 0.
      const double budget = pc.slo_s * static_cast<double>(si + 1) /
                            static_cast<double>(pc.stages.size());
      rt.pipeline->add_stage(
          sim::Stage(srt.agent_id, *dev, sc.action_space,
                     srt.agent ? rl::Action{0, 0, 0} : initial, budget,
                     pc.slo_s / 4.0),
          sc.fan_out);
      rt.stages.push_back(std::move(srt));
    }
    pipelines.push_back(std::move(rt));
  }

  for (auto& prt : pipelines)
    for (auto& srt : prt.stages) artifacts.events[srt.agent_id] = AgentEvents{};

  // --- Federation clusters --------------------------------------------
  std::vector<ClusterRuntime> clusters;
  Rng server_rng(derive_seed(cfg.seed, kStreamServer));
  if (cfg.federation.enabled) {
    std::vector<ClusterConfig> cluster_cfgs = cfg.clusters;
    if (cluster_cfgs.empty()) {
      ClusterConfig all;
      all.server = "server0";
      for (const PipelineConfig& pc : cfg.pipelines)
        for (std::size_t si = 0; si < pc.stages.size(); ++si)
          all.members.push_back(pc.name + "/" + std::to_string(si));
      cluster_cfgs.push_back(std::move(all));
    }
    for (const ClusterConfig& cc : cluster_cfgs) {
      ClusterRuntime crt;
      crt.server_id = cc.server;
      crt.coordinator = std::make_unique<fed::Coordinator>(
          cc.server, fed::GlobalModel::init(server_rng),
          cfg.federation.selection, cfg.federation.server_cost_s,
          derive_seed(cfg.seed, derive_seed(kStreamServer, clusters.size() + 1)));
      for (std::size_t pi = 0; pi < pipelines.size(); ++pi) {
        if (!federates(pipelines[pi].config->mode)) continue;
        for (std::size_t si = 0; si < pipelines[pi].stages.size(); ++si) {
          const std::string id = pipelines[pi].stages[si].agent_id;
          if (std::find(cc.members.begin(), cc.members.end(), id) !=
              cc.members.end())
            crt.members.emplace_back(pi, si);
        }
      }
      clusters.push_back(std::move(crt));
    }
  }
  const double round_period_s = cfg.federation.cadence_episodes *
                                cfg.train.steps_per_episode *
                                cfg.decision_period_s;

  // --- Output files ----------------------------------------------------
  std::FILE* csv = std::fopen(artifacts.metrics_csv.string().c_str(), "w");
  if (!csv) throw std::runtime_error("cannot write " + artifacts.metrics_csv.string());
  std::fprintf(csv, "%s\n", kMetricsHeader);
  std::ofstream rounds_out(artifacts.rounds_jsonl);

  long round_counter = 0;

  // --- Decision boundary processing -------------------------------------
  auto process_boundary = [&](double now) {
    // 1. Close the elapsed window per stage: reward, experience, update.
    //    Skipped at t = 0 where no window has elapsed yet.
    for (auto& prt : pipelines) {
      if (now <= 0.0) break;
      for (std::size_t si = 0; si < prt.stages.size(); ++si) {
        StageRuntime& srt = prt.stages[si];
        sim::Stage& stage = prt.pipeline->stage(si);
        const WindowStats& w = srt.window;
        const double window_s = tpd * dt;
        const double rate = static_cast<double>(w.arrivals) / window_s;
        const double tp = static_cast<double>(w.completions) / window_s;
        const double local_lat =
            w.completions > 0
                ? w.local_latency_sum / static_cast<double>(w.completions)
                : 0.0;
        const double reward = rl::compute_reward(
            tp, std::max(rate, kMinRequestRate), local_lat, stage.batch_size(),
            static_cast<int>(w.violations), cfg.train);
        srt.last_reward = reward;

        if (srt.agent && trains(srt.mode) && !srt.agent->awaiting() &&
            srt.pending) {
          srt.agent->complete_step(srt.pending->first, srt.pending->second,
                                   reward);
          srt.pending.reset();
          if (srt.agent->episode_full()) {
            const rl::LossReport report = srt.agent->update();
            ++artifacts.events[srt.agent_id].updates;
            if (report.applied) ++artifacts.events[srt.agent_id].updates_applied;
            srt.last_loss = report.total;
          }
        }
      }
    }

    // 2. Deliveries of in-flight rounds.
    for (auto& crt : clusters) {
      if (!crt.in_flight || now + 1e-9 < crt.deliver_at) continue;
      for (const auto& [pi, si] : crt.members) {
        StageRuntime& srt = pipelines[pi].stages[si];
        if (std::find(crt.participants.begin(), crt.participants.end(),
                      srt.agent_id) == crt.participants.end())
          continue;
        crt.coordinator->deliver(*srt.agent);
        ++artifacts.events[srt.agent_id].finetunes;
        srt.pending.reset();
      }
      crt.in_flight = false;
      ++crt.local_rounds_done;
    }

    // 3. Cloud exchange once every cluster finished R local rounds.
    if (clusters.size() > 1) {
      bool all_due = true;
      for (const auto& crt : clusters)
        if (crt.local_rounds_done < cfg.local_rounds_per_cloud_round ||
            crt.in_flight)
          all_due = false;
      if (all_due) {
        std::vector<std::pair<fed::Coordinator*, double>> with_loss;
        for (auto& crt : clusters) {
          double loss_sum = 0.0;
          long count = 0;
          for (const auto& [pi, si] : crt.members) {
            const rl::Agent& agent = *pipelines[pi].stages[si].agent;
            for (double h : agent.last_report().per_head) {
              loss_sum += h;
              ++count;
            }
          }
          with_loss.emplace_back(crt.coordinator.get(),
                                 count > 0 ? loss_sum / count : 0.0);
        }
        fed::hierarchical_exchange(with_loss);
        for (auto& crt : clusters) crt.local_rounds_done = 0;
        ++artifacts.cloud_rounds;
        ++cloud_due;
        json row;
        row["round"] = round_counter++;
        row["cloud"] = true;
        json members = json::array();
        for (const auto& crt : clusters) members.push_back(crt.server_id);
        row["participants"] = members;
        row["latency_s"] = 0.0;
        rounds_out << row.dump() << "\n";
      }
    }

    // 4. Start a round at the cadence when none is in flight.
    if (cfg.federation.enabled && round_period_s > 0.0) {
      const double phase = std::fmod(now, round_period_s);
      const bool on_cadence =
          now > 0.0 && (phase < dt * 0.5 || round_period_s - phase < dt * 0.5);
      if (on_cadence) {
        for (auto& crt : clusters) {
          if (crt.in_flight || crt.members.empty()) continue;
          // Final local update before upload (partial episodes force-close).
          std::vector<fed::ClientRef> refs;
          for (const auto& [pi, si] : crt.members) {
            StageRuntime& srt = pipelines[pi].stages[si];
            if (!srt.agent->episode().empty()) {
              const rl::LossReport report = srt.agent->update();
              ++artifacts.events[srt.agent_id].updates;
              if (report.applied)
                ++artifacts.events[srt.agent_id].updates_applied;
              srt.last_loss = report.total;
            }
            srt.pending.reset();
            refs.push_back(fed::ClientRef{srt.agent.get(), srt.device});
          }
          const fed::RoundOutcome outcome = crt.coordinator->start_round(refs);
          ++artifacts.rounds_started;
          json row;
          row["round"] = round_counter++;
          row["cluster"] = crt.server_id;
          row["participants"] = outcome.participants;
          row["latency_s"] = outcome.latency_s;
          row["payload_bytes"] = outcome.payload_bytes_total;
          row["skipped"] = outcome.skipped;
          json banks = json::object();
          for (const auto& [key, weights] : outcome.bank_weights) {
            json wj = json::object();
            for (const auto& [id, w] : weights) wj[id] = w;
            banks[key.str()] = wj;
          }
          row["bank_weights"] = banks;
          rounds_out << row.dump() << "\n";
          if (outcome.skipped) {
            ++artifacts.rounds_skipped;
            continue;
          }
          crt.in_flight = true;
          crt.deliver_at = now + outcome.latency_s;
          crt.participants = outcome.participants;
          for (const auto& [pi, si] : crt.members) {
            StageRuntime& srt = pipelines[pi].stages[si];
            if (std::find(outcome.participants.begin(),
                          outcome.participants.end(),
                          srt.agent_id) != outcome.participants.end()) {
              srt.agent->begin_await();
              ++artifacts.events[srt.agent_id].rounds;
            }
          }
        }
      }
    }

    // 5. New decisions for the next window.
    for (auto& prt : pipelines) {
      for (std::size_t si = 0; si < prt.stages.size(); ++si) {
        StageRuntime& srt = prt.stages[si];
        sim::Stage& stage = prt.pipeline->stage(si);
        const WindowStats& w = srt.window;
        const double window_s = tpd * dt;
        const double rate = static_cast<double>(w.arrivals) / window_s;
        const rl::State s =
            stage.observe(rate, w.drops, w.arrivals, prt.config->slo_s);
        if (srt.agent) {
          const rl::Decision d = srt.agent->decide(s);
          ++srt.decisions;
          if (srt.agent->awaiting()) {
            srt.agent->log_history(s, d.chosen);
          } else if (trains(srt.mode)) {
            srt.pending = std::make_pair(s, d);
          }
          stage.apply_action(d.action);
        }
        srt.window.reset();
      }
    }
  };

  // --- Main loop ---------------------------------------------------------
  // Initial decisions from the idle state, before the first tick.
  try {
    process_boundary(0.0);
  } catch (const std::exception& e) {
    std::fclose(csv);
    throw std::runtime_error(std::string("tick 0: ") + e.what());
  }

  for (long tick = 0; tick < total_ticks; ++tick) {
    const double t = static_cast<double>(tick) * dt;
    try {
      for (auto& prt : pipelines) {
        const int arrivals =
            sim::generate_arrivals(*prt.trace, t, dt, *prt.trace_rng);
        const sim::PipelineTick result =
            prt.pipeline->step(arrivals, t, dt, *prt.jitter_rng);
        for (std::size_t si = 0; si < prt.stages.size(); ++si) {
          StageRuntime& srt = prt.stages[si];
          const sim::StepMetrics& m = result.stages[si];
          srt.window.arrivals += m.arrivals;
          srt.window.drops += m.drops;
          srt.window.completions += m.completions;
          srt.window.violations += m.violations;
          srt.window.local_latency_sum +=
              m.local_latency_mean * static_cast<double>(m.completions);
          write_csv_row(csv, t, srt.agent_id, m, srt.last_reward, srt.last_loss,
                        prt.pipeline->stage(si).current_action());
        }
      }
      if ((tick + 1) % tpd == 0)
        process_boundary(static_cast<double>(tick + 1) * dt);
    } catch (const std::exception& e) {
      std::fclose(csv);
      throw std::runtime_error("tick " + std::to_string(tick) + ": " + e.what());
    }
  }
  std::fclose(csv);
  rounds_out.close();

  // --- Checkpoints -------------------------------------------------------
  for (const auto& prt : pipelines) {
    for (std::size_t si = 0; si < prt.stages.size(); ++si) {
      const StageRuntime& srt = prt.stages[si];
      if (!srt.agent) continue;
      rl::save_network(
          artifacts.checkpoint_dir / checkpoint_name(prt.config->name, si),
          srt.agent->network());
    }
  }
  for (const auto& crt : clusters)
    fed::save_global(artifacts.checkpoint_dir / ("global-" + crt.server_id + ".bin"),
                     crt.coordinator->model());

  // --- Summary and events --------------------------------------------------
  const double episode_s =
      cfg.train.steps_per_episode * cfg.decision_period_s;
  artifacts.summary = json::object();
  artifacts.summary["summary"] = summarize(artifacts.metrics_csv, episode_s);
  artifacts.summary["config"] = to_json(cfg);
  {
    std::ofstream out(artifacts.summary_path);
    out << artifacts.summary.dump(2) << "\n";
  }
  {
    json ev = json::object();
    for (const auto& [id, e] : artifacts.events)
      ev[id] = {{"updates", e.updates},
                {"updates_applied", e.updates_applied},
                {"rounds", e.rounds},
                {"finetunes", e.finetunes}};
    ev["rounds_started"] = artifacts.rounds_started;
    ev["rounds_skipped"] = artifacts.rounds_skipped;
    ev["cloud_rounds"] = artifacts.cloud_rounds;
    std::ofstream out(artifacts.events_path);
    out << ev.dump(2) << "\n";
  }
  return artifacts;
}

}  // namespace edgerl::experiment
