#include "edgerl/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace edgerl::experiment {

namespace {

using nlohmann::json;

// Collects every problem instead of stopping at the first one.
struct Ctx {
  std::vector<ValidationError>* errors;

  void error(const std::string& field, const std::string& message) {
    errors->push_back(ValidationError{field, message});
  }

  void check_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return;
    }
    for (const auto& [key, _] : j.items())
      if (!allowed.count(key))
        error(path.empty() ? key : path + "." + key, "unknown key");
  }

  template <typename T>
  T get(const json& j, const std::string& path, const std::string& key,
        T fallback, bool required = false) {
    const std::string field = path.empty() ? key : path + "." + key;
    if (!j.contains(key)) {
      if (required) error(field, "missing required key");
      return fallback;
    }
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      error(field, "wrong type");
      return fallback;
    }
  }

  void require_positive(double v, const std::string& field) {
    if (!(v > 0.0)) error(field, "must be > 0");
  }
};

sim::DeviceProfile parse_device(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path,
                 {"name", "base_latency_s", "per_item_latency_s",
                  "preproc_cost_s", "postproc_cost_s", "cores", "max_threads",
                  "max_batch", "queue_capacity", "memory_availability",
                  "compute_availability", "bandwidth_mbps", "fl_memory_budget"});
  sim::DeviceProfile d;
  d.name = ctx.get<std::string>(j, path, "name", "", true);
  d.base_latency_s = ctx.get<double>(j, path, "base_latency_s", d.base_latency_s, true);
  d.per_item_latency_s =
      ctx.get<double>(j, path, "per_item_latency_s", d.per_item_latency_s, true);
  d.preproc_cost_s = ctx.get<double>(j, path, "preproc_cost_s", d.preproc_cost_s, true);
  d.postproc_cost_s = ctx.get<double>(j, path, "postproc_cost_s", d.postproc_cost_s, true);
  d.cores = ctx.get<int>(j, path, "cores", d.cores);
  d.max_threads = ctx.get<int>(j, path, "max_threads", d.max_threads);
  d.max_batch = ctx.get<int>(j, path, "max_batch", d.max_batch);
  d.queue_capacity = ctx.get<int>(j, path, "queue_capacity", d.queue_capacity);
  d.memory_availability =
      ctx.get<double>(j, path, "memory_availability", d.memory_availability);
  d.compute_availability =
      ctx.get<double>(j, path, "compute_availability", d.compute_availability);
  d.bandwidth_mbps = ctx.get<double>(j, path, "bandwidth_mbps", d.bandwidth_mbps);
  d.fl_memory_budget = ctx.get<int>(j, path, "fl_memory_budget", d.fl_memory_budget);
  try {
    d.validate();
  } catch (const std::exception& e) {
    ctx.error(path, e.what());
  }
  return d;
}

sim::WorkloadTrace parse_trace(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path, {"name", "seed", "segments"});
  sim::WorkloadTrace t;
  t.name = ctx.get<std::string>(j, path, "name", "", true);
  t.seed = ctx.get<std::uint64_t>(j, path, "seed", 0);
  if (j.contains("segments") && j.at("segments").is_array()) {
    int i = 0;
    for (const json& seg : j.at("segments")) {
      const std::string sp = path + ".segments[" + std::to_string(i++) + "]";
      ctx.check_keys(seg, sp, {"duration_s", "rate_hz", "burstiness"});
      sim::TraceSegment s;
      s.duration_s = ctx.get<double>(seg, sp, "duration_s", 0.0, true);
      s.rate_hz = ctx.get<double>(seg, sp, "rate_hz", 0.0, true);
      s.burstiness = ctx.get<double>(seg, sp, "burstiness", 0.0);
      t.segments.push_back(s);
    }
  } else {
    ctx.error(path + ".segments", "missing or not an array");
  }
  try {
    t.validate();
  } catch (const std::exception& e) {
    ctx.error(path, e.what());
  }
  return t;
}

StageConfig parse_stage(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path,
                 {"device", "fan_out", "res_choices", "bs_choices", "mt_choices"});
  StageConfig s;
  s.device = ctx.get<std::string>(j, path, "device", "", true);
  s.fan_out = ctx.get<double>(j, path, "fan_out", 1.0);
  ctx.require_positive(s.fan_out, path + ".fan_out");
  s.action_space.res_choices =
      ctx.get<std::vector<int>>(j, path, "res_choices", {1}, true);
  s.action_space.bs_choices =
      ctx.get<std::vector<int>>(j, path, "bs_choices", {1}, true);
  s.action_space.mt_choices =
      ctx.get<std::vector<int>>(j, path, "mt_choices", {1}, true);
  try {
    s.action_space.validate();
  } catch (const std::exception& e) {
    ctx.error(path, e.what());
  }
  return s;
}

PipelineConfig parse_pipeline(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path,
                 {"name", "trace", "slo_s", "mode", "stages", "init_agent_dir",
                  "init_agent_pipeline", "init_global"});
  PipelineConfig p;
  p.name = ctx.get<std::string>(j, path, "name", "", true);
  p.trace = ctx.get<std::string>(j, path, "trace", "", true);
  p.slo_s = ctx.get<double>(j, path, "slo_s", 0.25);
  if (!(p.slo_s > 0.0)) ctx.error(path + ".slo_s", "SLO must be > 0");
  const std::string mode = ctx.get<std::string>(j, path, "mode", "learning");
  if (auto m = agent_mode_from_string(mode)) {
    p.mode = *m;
  } else {
    ctx.error(path + ".mode",
              "unknown mode '" + mode +
                  "' (expected learning|frozen|fixed|blank|single_head)");
  }
  if (j.contains("stages") && j.at("stages").is_array()) {
    int i = 0;
    for (const json& st : j.at("stages"))
      p.stages.push_back(
          parse_stage(st, path + ".stages[" + std::to_string(i++) + "]", ctx));
  } else {
    ctx.error(path + ".stages", "missing or not an array");
  }
  if (p.stages.empty()) ctx.error(path + ".stages", "at least one stage required");
  p.init_agent_dir = ctx.get<std::string>(j, path, "init_agent_dir", "");
  p.init_agent_pipeline = ctx.get<std::string>(j, path, "init_agent_pipeline", "");
  p.init_global = ctx.get<std::string>(j, path, "init_global", "");
  if (!p.init_global.empty() && !p.init_agent_dir.empty())
    ctx.error(path, "init_global and init_agent_dir are mutually exclusive");
  if (!p.init_agent_dir.empty() && p.init_agent_pipeline.empty())
    p.init_agent_pipeline = p.name;
  return p;
}

rl::TrainConfig parse_train(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path,
                 {"steps_per_episode", "learning_rate",
                  "reward_throughput_weight", "reward_latency_weight",
                  "reward_oversize_weight", "discount", "gae_decay",
                  "penalty_weight", "ratio_clip", "diversity_state_weight",
                  "diversity_policy_weight", "loss_gate", "diversity_capacity",
                  "update_rule"});
  rl::TrainConfig t;
  t.steps_per_episode = ctx.get<int>(j, path, "steps_per_episode", t.steps_per_episode);
  t.learning_rate = ctx.get<double>(j, path, "learning_rate", t.learning_rate);
  t.reward_throughput_weight = ctx.get<double>(
      j, path, "reward_throughput_weight", t.reward_throughput_weight);
  t.reward_latency_weight =
      ctx.get<double>(j, path, "reward_latency_weight", t.reward_latency_weight);
  t.reward_oversize_weight = ctx.get<double>(j, path, "reward_oversize_weight",
                                             t.reward_oversize_weight);
  t.discount = ctx.get<double>(j, path, "discount", t.discount);
  t.gae_decay = ctx.get<double>(j, path, "gae_decay", t.gae_decay);
  t.penalty_weight = ctx.get<double>(j, path, "penalty_weight", t.penalty_weight);
  t.ratio_clip = ctx.get<double>(j, path, "ratio_clip", t.ratio_clip);
  t.diversity_state_weight = ctx.get<double>(j, path, "diversity_state_weight",
                                             t.diversity_state_weight);
  t.diversity_policy_weight = ctx.get<double>(
      j, path, "diversity_policy_weight", t.diversity_policy_weight);
  t.loss_gate = ctx.get<double>(j, path, "loss_gate", t.loss_gate);
  t.diversity_capacity =
      ctx.get<int>(j, path, "diversity_capacity", t.diversity_capacity);
  const std::string rule = ctx.get<std::string>(j, path, "update_rule", "adaptive");
  if (rule == "adaptive") {
    t.update_rule = nn::UpdateRule::kAdaptiveMoments;
  } else if (rule == "plain") {
    t.update_rule = nn::UpdateRule::kPlainGradient;
  } else {
    ctx.error(path + ".update_rule", "expected 'adaptive' or 'plain'");
  }
  try {
    t.validate();
  } catch (const std::exception& e) {
    ctx.error(path, e.what());
  }
  return t;
}

FederationConfig parse_federation(const json& j, const std::string& path, Ctx& ctx) {
  ctx.check_keys(j, path,
                 {"enabled", "cadence_episodes", "server_cost_s",
                  "participation_fraction", "utility_weights",
                  "bandwidth_norm_mbps"});
  FederationConfig f;
  f.enabled = ctx.get<bool>(j, path, "enabled", f.enabled);
  f.cadence_episodes = ctx.get<int>(j, path, "cadence_episodes", f.cadence_episodes);
  if (f.cadence_episodes < 1) ctx.error(path + ".cadence_episodes", "must be >= 1");
  f.server_cost_s = ctx.get<double>(j, path, "server_cost_s", f.server_cost_s);
  if (f.server_cost_s < 0.0) ctx.error(path + ".server_cost_s", "must be >= 0");
  f.selection.participation_fraction = ctx.get<double>(
      j, path, "participation_fraction", f.selection.participation_fraction);
  if (j.contains("utility_weights")) {
    const json& w = j.at("utility_weights");
    const std::string wp = path + ".utility_weights";
    ctx.check_keys(w, wp, {"memory", "compute", "diversity"});
    f.selection.w_mem = ctx.get<double>(w, wp, "memory", f.selection.w_mem);
    f.selection.w_comp = ctx.get<double>(w, wp, "compute", f.selection.w_comp);
    f.selection.w_div = ctx.get<double>(w, wp, "diversity", f.selection.w_div);
  }
  f.selection.bandwidth_norm_mbps = ctx.get<double>(
      j, path, "bandwidth_norm_mbps", f.selection.bandwidth_norm_mbps);
  try {
    f.selection.validate();
  } catch (const std::exception& e) {
    ctx.error(path, e.what());
  }
  return f;
}

}  // namespace

std::string to_string(AgentMode mode) {
  switch (mode) {
    case AgentMode::kLearning: return "learning";
    case AgentMode::kFrozen: return "frozen";
    case AgentMode::kFixed: return "fixed";
    case AgentMode::kBlank: return "blank";
    case AgentMode::kSingleHead: return "single_head";
  }
  return "learning";
}

std::optional<AgentMode> agent_mode_from_string(const std::string& s) {
  if (s == "learning") return AgentMode::kLearning;
  if (s == "frozen") return AgentMode::kFrozen;
  if (s == "fixed") return AgentMode::kFixed;
  if (s == "blank") return AgentMode::kBlank;
  if (s == "single_head") return AgentMode::kSingleHead;
  return std::nullopt;
}

int ExperimentConfig::ticks_per_decision() const {
  return std::max(1, static_cast<int>(std::llround(decision_period_s / dt_s)));
}

const sim::DeviceProfile* ExperimentConfig::find_device(
    const std::string& name) const {
  for (const auto& d : devices)
    if (d.name == name) return &d;
  return nullptr;
}

const sim::WorkloadTrace* ExperimentConfig::find_trace(
    const std::string& name) const {
  for (const auto& t : traces)
    if (t.name == name) return &t;
  return nullptr;
}

LoadResult parse_config(const nlohmann::json& j) {
  LoadResult result;
  Ctx ctx{&result.errors};
  ctx.check_keys(j, "",
                 {"seed", "duration_s", "dt_s", "decision_period_s", "devices",
                  "traces", "pipelines", "train", "federation", "clusters",
                  "local_rounds_per_cloud_round"});
  if (!j.is_object()) return result;

  ExperimentConfig cfg;
  cfg.seed = ctx.get<std::uint64_t>(j, "", "seed", 0);
  cfg.duration_s = ctx.get<double>(j, "", "duration_s", 0.0, true);
  if (cfg.duration_s < 0.0) ctx.error("duration_s", "must be >= 0");
  cfg.dt_s = ctx.get<double>(j, "", "dt_s", cfg.dt_s);
  ctx.require_positive(cfg.dt_s, "dt_s");
  cfg.decision_period_s =
      ctx.get<double>(j, "", "decision_period_s", cfg.decision_period_s);
  ctx.require_positive(cfg.decision_period_s, "decision_period_s");

  if (j.contains("devices") && j.at("devices").is_array()) {
    int i = 0;
    for (const json& d : j.at("devices"))
      cfg.devices.push_back(
          parse_device(d, "devices[" + std::to_string(i++) + "]", ctx));
  } else {
    ctx.error("devices", "missing or not an array");
  }
  for (std::size_t a = 0; a < cfg.devices.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.devices.size(); ++b)
      if (cfg.devices[a].name == cfg.devices[b].name)
        ctx.error("devices",
                  "duplicate device name '" + cfg.devices[a].name +
                      "' (definitions " + std::to_string(a) + " and " +
                      std::to_string(b) + ")");

  if (j.contains("traces") && j.at("traces").is_array()) {
    int i = 0;
    for (const json& t : j.at("traces"))
      cfg.traces.push_back(
          parse_trace(t, "traces[" + std::to_string(i++) + "]", ctx));
  } else {
    ctx.error("traces", "missing or not an array");
  }
  for (std::size_t a = 0; a < cfg.traces.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.traces.size(); ++b)
      if (cfg.traces[a].name == cfg.traces[b].name)
        ctx.error("traces", "duplicate trace name '" + cfg.traces[a].name + "'");

  if (j.contains("pipelines") && j.at("pipelines").is_array()) {
    int i = 0;
    for (const json& p : j.at("pipelines"))
      cfg.pipelines.push_back(
          parse_pipeline(p, "pipelines[" + std::to_string(i++) + "]", ctx));
  } else {
    ctx.error("pipelines", "missing or not an array");
  }
  for (std::size_t a = 0; a < cfg.pipelines.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.pipelines.size(); ++b)
      if (cfg.pipelines[a].name == cfg.pipelines[b].name)
        ctx.error("pipelines",
                  "duplicate pipeline name '" + cfg.pipelines[a].name + "'");

  if (j.contains("train")) cfg.train = parse_train(j.at("train"), "train", ctx);
  if (j.contains("federation"))
    cfg.federation = parse_federation(j.at("federation"), "federation", ctx);

  if (j.contains("clusters")) {
    if (j.at("clusters").is_array()) {
      int i = 0;
      for (const json& c : j.at("clusters")) {
        const std::string cp = "clusters[" + std::to_string(i++) + "]";
        ctx.check_keys(c, cp, {"server", "members"});
        ClusterConfig cc;
        cc.server = ctx.get<std::string>(c, cp, "server", "", true);
        cc.members = ctx.get<std::vector<std::string>>(c, cp, "members", {}, true);
        cfg.clusters.push_back(std::move(cc));
      }
    } else {
      ctx.error("clusters", "not an array");
    }
  }
  cfg.local_rounds_per_cloud_round =
      ctx.get<int>(j, "", "local_rounds_per_cloud_round", 1);
  if (cfg.local_rounds_per_cloud_round < 1)
    ctx.error("local_rounds_per_cloud_round", "must be >= 1");

  // Cross-references.
  for (std::size_t i = 0; i < cfg.pipelines.size(); ++i) {
    const PipelineConfig& p = cfg.pipelines[i];
    const std::string path = "pipelines[" + std::to_string(i) + "]";
    if (!p.trace.empty() && !cfg.find_trace(p.trace))
      ctx.error(path + ".trace", "unknown trace '" + p.trace + "'");
    for (std::size_t s = 0; s < p.stages.size(); ++s) {
      const StageConfig& st = p.stages[s];
      const std::string sp = path + ".stages[" + std::to_string(s) + "]";
      const sim::DeviceProfile* dev = cfg.find_device(st.device);
      if (!dev) {
        ctx.error(sp + ".device", "unknown device '" + st.device + "'");
        continue;
      }
      if (!st.action_space.bs_choices.empty() &&
          st.action_space.bs_choices.back() > dev->max_batch)
        ctx.error(sp + ".bs_choices", "exceeds device max_batch");
      if (!st.action_space.mt_choices.empty() &&
          st.action_space.mt_choices.back() > dev->max_threads)
        ctx.error(sp + ".mt_choices", "exceeds device max_threads");
    }
  }
  {
    std::set<std::string> agent_ids;
    for (const PipelineConfig& p : cfg.pipelines)
      for (std::size_t s = 0; s < p.stages.size(); ++s)
        agent_ids.insert(p.name + "/" + std::to_string(s));
    std::set<std::string> assigned;
    for (std::size_t c = 0; c < cfg.clusters.size(); ++c) {
      for (const std::string& m : cfg.clusters[c].members) {
        const std::string cp = "clusters[" + std::to_string(c) + "]";
        if (!agent_ids.count(m))
          ctx.error(cp, "unknown member agent '" + m + "'");
        if (!assigned.insert(m).second)
          ctx.error(cp, "agent '" + m + "' assigned to multiple clusters");
      }
    }
  }

  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

LoadResult load_config(const std::filesystem::path& path) {
  LoadResult result;
  std::ifstream in(path);
  if (!in) {
    result.errors.push_back({path.string(), "cannot open file"});
    return result;
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    result.errors.push_back({path.string(), std::string("JSON parse: ") + e.what()});
    return result;
  }
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["duration_s"] = cfg.duration_s;
  j["dt_s"] = cfg.dt_s;
  j["decision_period_s"] = cfg.decision_period_s;
  j["devices"] = json::array();
  for (const sim::DeviceProfile& d : cfg.devices) {
    j["devices"].push_back({{"name", d.name},
                            {"base_latency_s", d.base_latency_s},
                            {"per_item_latency_s", d.per_item_latency_s},
                            {"preproc_cost_s", d.preproc_cost_s},
                            {"postproc_cost_s", d.postproc_cost_s},
                            {"cores", d.cores},
                            {"max_threads", d.max_threads},
                            {"max_batch", d.max_batch},
                            {"queue_capacity", d.queue_capacity},
                            {"memory_availability", d.memory_availability},
                            {"compute_availability", d.compute_availability},
                            {"bandwidth_mbps", d.bandwidth_mbps},
                            {"fl_memory_budget", d.fl_memory_budget}});
  }
  j["traces"] = json::array();
  for (const sim::WorkloadTrace& t : cfg.traces) {
    json segs = json::array();
    for (const sim::TraceSegment& s : t.segments)
      segs.push_back({{"duration_s", s.duration_s},
                      {"rate_hz", s.rate_hz},
                      {"burstiness", s.burstiness}});
    j["traces"].push_back({{"name", t.name}, {"seed", t.seed}, {"segments", segs}});
  }
  j["pipelines"] = json::array();
  for (const PipelineConfig& p : cfg.pipelines) {
    json stages = json::array();
    for (const StageConfig& s : p.stages)
      stages.push_back({{"device", s.device},
                        {"fan_out", s.fan_out},
                        {"res_choices", s.action_space.res_choices},
                        {"bs_choices", s.action_space.bs_choices},
                        {"mt_choices", s.action_space.mt_choices}});
    json pj = {{"name", p.name},       {"trace", p.trace},
               {"slo_s", p.slo_s},     {"mode", to_string(p.mode)},
               {"stages", stages}};
    if (!p.init_agent_dir.empty()) {
      pj["init_agent_dir"] = p.init_agent_dir;
      pj["init_agent_pipeline"] = p.init_agent_pipeline;
    }
    if (!p.init_global.empty()) pj["init_global"] = p.init_global;
    j["pipelines"].push_back(std::move(pj));
  }
  j["train"] = {
      {"steps_per_episode", cfg.train.steps_per_episode},
      {"learning_rate", cfg.train.learning_rate},
      {"reward_throughput_weight", cfg.train.reward_throughput_weight},
      {"reward_latency_weight", cfg.train.reward_latency_weight},
      {"reward_oversize_weight", cfg.train.reward_oversize_weight},
      {"discount", cfg.train.discount},
      {"gae_decay", cfg.train.gae_decay},
      {"penalty_weight", cfg.train.penalty_weight},
      {"ratio_clip", cfg.train.ratio_clip},
      {"diversity_state_weight", cfg.train.diversity_state_weight},
      {"diversity_policy_weight", cfg.train.diversity_policy_weight},
      {"loss_gate", cfg.train.loss_gate},
      {"diversity_capacity", cfg.train.diversity_capacity},
      {"update_rule", cfg.train.update_rule == nn::UpdateRule::kAdaptiveMoments
                          ? "adaptive"
                          : "plain"}};
  j["federation"] = {
      {"enabled", cfg.federation.enabled},
      {"cadence_episodes", cfg.federation.cadence_episodes},
      {"server_cost_s", cfg.federation.server_cost_s},
      {"participation_fraction", cfg.federation.selection.participation_fraction},
      {"utility_weights",
       {{"memory", cfg.federation.selection.w_mem},
        {"compute", cfg.federation.selection.w_comp},
        {"diversity", cfg.federation.selection.w_div}}},
      {"bandwidth_norm_mbps", cfg.federation.selection.bandwidth_norm_mbps}};
  if (!cfg.clusters.empty()) {
    j["clusters"] = json::array();
    for (const ClusterConfig& c : cfg.clusters)
      j["clusters"].push_back({{"server", c.server}, {"members", c.members}});
  }
  j["local_rounds_per_cloud_round"] = cfg.local_rounds_per_cloud_round;
  return j;
}

nlohmann::json errors_to_json(const std::vector<ValidationError>& errors) {
  json arr = json::array();
  for (const ValidationError& e : errors)
    arr.push_back({{"field", e.field}, {"message", e.message}});
  return arr;
}

}  // namespace edgerl::experiment
