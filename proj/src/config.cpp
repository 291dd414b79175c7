#include "poisonbench/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

namespace poisonbench {

using nlohmann::json;

namespace {

void reject_unknown(const json& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : node.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(path + "." + key + ": unknown key");
  }
}

template <typename T>
void read(const json& node, const char* key, const std::string& path, T& out) {
  if (!node.contains(key)) return;
  try {
    out = node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

template <typename Enum>
Enum parse_enum(const json& node, const char* key, const std::string& path,
                std::initializer_list<std::pair<const char*, Enum>> table, Enum fallback) {
  if (!node.contains(key)) return fallback;
  std::string text;
  read(node, key, path, text);
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  throw ConfigError(path + "." + key + ": unknown value '" + text + "'");
}

const std::initializer_list<std::pair<const char*, EnvironmentKind>> kEnvironmentKinds{
    {"grid1d", EnvironmentKind::grid1d},
    {"grid2d", EnvironmentKind::grid2d},
    {"random", EnvironmentKind::random},
    {"two_state", EnvironmentKind::two_state},
    {"file", EnvironmentKind::file}};
const std::initializer_list<std::pair<const char*, TargetSource>> kTargetSources{
    {"generated", TargetSource::generated},
    {"optimal", TargetSource::optimal},
    {"grid2d", TargetSource::grid2d},
    {"table", TargetSource::table},
    {"file", TargetSource::file}};
const std::initializer_list<std::pair<const char*, AgentKind>> kAgentKinds{
    {"ucbh", AgentKind::ucbh},
    {"ucbb", AgentKind::ucbb},
    {"optimal_policy", AgentKind::optimal_policy},
    {"target_policy", AgentKind::target_policy},
    {"uniform", AgentKind::uniform}};
const std::initializer_list<std::pair<const char*, AttackerKind>> kAttackerKinds{
    {"none", AttackerKind::none},
    {"exchange", AttackerKind::exchange},
    {"alpha_portion", AttackerKind::alpha_portion},
    {"lcbh", AttackerKind::lcbh}};

template <typename Enum>
std::string name_of(std::initializer_list<std::pair<const char*, Enum>> table, Enum value) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

EnvironmentConfig parse_environment(const json& node, const std::string& path) {
  reject_unknown(node, path,
                 {"kind", "num_states", "num_actions", "horizon", "p_low", "p_high", "reward_levels", "seed", "path",
                  "reward_noise"});
  EnvironmentConfig env;
  env.kind = parse_enum(node, "kind", path, kEnvironmentKinds, env.kind);
  read(node, "seed", path, env.seed);
  read(node, "path", path, env.path);
  if (env.kind == EnvironmentKind::grid1d) {
    read(node, "num_states", path, env.grid1d.num_states);
    read(node, "num_actions", path, env.grid1d.num_actions);
    read(node, "horizon", path, env.grid1d.horizon);
    read(node, "p_low", path, env.grid1d.p_low);
    read(node, "p_high", path, env.grid1d.p_high);
    read(node, "reward_levels", path, env.grid1d.reward_levels);
    env.grid1d.seed = env.seed;
  } else {
    read(node, "num_states", path, env.num_states);
    read(node, "num_actions", path, env.num_actions);
    read(node, "horizon", path, env.horizon);
  }
  if (node.contains("reward_noise")) {
    env.reward_noise = parse_enum(node, "reward_noise", path,
                                  {{"bernoulli", RewardNoise::bernoulli}, {"deterministic", RewardNoise::deterministic}},
                                  RewardNoise::bernoulli);
  }
  if (env.kind == EnvironmentKind::file && env.path.empty()) throw ConfigError(path + ".path: required for kind 'file'");
  return env;
}

TargetConfig parse_target(const json& node, const std::string& path) {
  reject_unknown(node, path, {"source", "seed", "actions", "path"});
  TargetConfig target;
  target.source = parse_enum(node, "source", path, kTargetSources, target.source);
  read(node, "seed", path, target.seed);
  read(node, "actions", path, target.actions);
  read(node, "path", path, target.path);
  if (target.source == TargetSource::table && target.actions.empty()) {
    throw ConfigError(path + ".actions: required for source 'table'");
  }
  if (target.source == TargetSource::file && target.path.empty()) {
    throw ConfigError(path + ".path: required for source 'file'");
  }
  return target;
}

AgentConfig parse_agent(const json& node, const std::string& path) {
  reject_unknown(node, path, {"kind", "c", "p", "q_init", "c_bernstein"});
  AgentConfig agent;
  agent.kind = parse_enum(node, "kind", path, kAgentKinds, agent.kind);
  read(node, "c", path, agent.ucb.c);
  read(node, "p", path, agent.ucb.p);
  read(node, "c_bernstein", path, agent.ucb.c_bernstein);
  agent.ucb.q_init =
      parse_enum(node, "q_init", path, {{"optimistic", QInit::optimistic}, {"zero", QInit::zero}}, agent.ucb.q_init);
  if (!(agent.ucb.c > 0.0)) throw ConfigError(path + ".c: must be positive");
  if (!(agent.ucb.c_bernstein > 0.0)) throw ConfigError(path + ".c_bernstein: must be positive");
  if (!(agent.ucb.p > 0.0 && agent.ucb.p < 1.0)) throw ConfigError(path + ".p: must lie in (0, 1)");
  return agent;
}

AttackerConfig parse_attacker(const json& node, const std::string& path) {
  reject_unknown(node, path, {"kind", "alpha", "p"});
  AttackerConfig attacker;
  attacker.kind = parse_enum(node, "kind", path, kAttackerKinds, attacker.kind);
  if (node.contains("alpha") && !node.at("alpha").is_null()) {
    const json& alpha = node.at("alpha");
    if (alpha.is_string()) {
      if (alpha.get<std::string>() != "1/H") throw ConfigError(path + ".alpha: expected a number or \"1/H\"");
    } else {
      double value = 0.0;
      read(node, "alpha", path, value);
      if (!(value > 0.0 && value <= 1.0)) throw ConfigError(path + ".alpha: must lie in (0, 1]");
      attacker.alpha = value;
    }
  }
  read(node, "p", path, attacker.p);
  if (!(attacker.p > 0.0 && attacker.p < 1.0)) throw ConfigError(path + ".p: must lie in (0, 1)");
  return attacker;
}

}  // namespace

std::string to_string(EnvironmentKind kind) { return name_of(kEnvironmentKinds, kind); }
std::string to_string(TargetSource source) { return name_of(kTargetSources, source); }
std::string to_string(AgentKind kind) { return name_of(kAgentKinds, kind); }
std::string to_string(AttackerKind kind) { return name_of(kAttackerKinds, kind); }

ExperimentConfig experiment_from_json(const json& doc) {
  const std::string root = "config";
  reject_unknown(doc, root,
                 {"environment", "target", "agent", "attacker", "episodes", "seed", "checkpoints", "tail_fraction"});
  ExperimentConfig config;
  if (doc.contains("environment")) config.environment = parse_environment(doc.at("environment"), root + ".environment");
  if (doc.contains("target")) config.target = parse_target(doc.at("target"), root + ".target");
  if (doc.contains("agent")) config.agent = parse_agent(doc.at("agent"), root + ".agent");
  if (doc.contains("attacker")) config.attacker = parse_attacker(doc.at("attacker"), root + ".attacker");
  read(doc, "episodes", root, config.episodes);
  read(doc, "seed", root, config.seed);
  read(doc, "checkpoints", root, config.checkpoints);
  read(doc, "tail_fraction", root, config.tail_fraction);
  if (config.episodes < 1) throw ConfigError(root + ".episodes: must be at least 1");
  if (config.checkpoints < 1) throw ConfigError(root + ".checkpoints: must be at least 1");
  if (!(config.tail_fraction > 0.0 && config.tail_fraction <= 1.0)) {
    throw ConfigError(root + ".tail_fraction: must lie in (0, 1]");
  }
  return config;
}

json experiment_to_json(const ExperimentConfig& config) {
  const auto& env = config.environment;
  json environment{{"kind", to_string(env.kind)}, {"seed", env.seed}};
  switch (env.kind) {
    case EnvironmentKind::grid1d:
      environment["num_states"] = env.grid1d.num_states;
      environment["num_actions"] = env.grid1d.num_actions;
      environment["horizon"] = env.grid1d.horizon;
      environment["p_low"] = env.grid1d.p_low;
      environment["p_high"] = env.grid1d.p_high;
      environment["reward_levels"] = env.grid1d.reward_levels;
      break;
    case EnvironmentKind::random:
      environment["num_states"] = env.num_states;
      environment["num_actions"] = env.num_actions;
      environment["horizon"] = env.horizon;
      break;
    case EnvironmentKind::file:
      environment["path"] = env.path;
      break;
    default:
      break;
  }
  if (env.reward_noise) {
    environment["reward_noise"] = *env.reward_noise == RewardNoise::bernoulli ? "bernoulli" : "deterministic";
  }

  json target{{"source", to_string(config.target.source)}, {"seed", config.target.seed}};
  if (config.target.source == TargetSource::table) target["actions"] = config.target.actions;
  if (config.target.source == TargetSource::file) target["path"] = config.target.path;

  json agent{{"kind", to_string(config.agent.kind)},
             {"c", config.agent.ucb.c},
             {"p", config.agent.ucb.p},
             {"c_bernstein", config.agent.ucb.c_bernstein},
             {"q_init", config.agent.ucb.q_init == QInit::optimistic ? "optimistic" : "zero"}};

  json attacker{{"kind", to_string(config.attacker.kind)}, {"p", config.attacker.p}};
  attacker["alpha"] = config.attacker.alpha ? json(*config.attacker.alpha) : json("1/H");

  return json{{"environment", std::move(environment)},
              {"target", std::move(target)},
              {"agent", std::move(agent)},
              {"attacker", std::move(attacker)},
              {"episodes", config.episodes},
              {"seed", config.seed},
              {"checkpoints", config.checkpoints},
              {"tail_fraction", config.tail_fraction}};
}

RunManifest manifest_from_json(const json& doc) {
  const std::string root = "manifest";
  reject_unknown(doc, root, {"out_dir", "jobs", "runs"});
  RunManifest manifest;
  read(doc, "out_dir", root, manifest.out_dir);
  read(doc, "jobs", root, manifest.parallelism);
  if (manifest.parallelism < 1) throw ConfigError(root + ".jobs: must be at least 1");
  if (!doc.contains("runs")) return manifest;
  const json& runs = doc.at("runs");
  if (!runs.is_array()) throw ConfigError(root + ".runs: expected an array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = root + ".runs[" + std::to_string(i) + "]";
    const json& run = runs[i];
    reject_unknown(run, path, {"name", "seed", "seeds", "config"});
    std::string name;
    read(run, "name", path, name);
    if (name.empty()) throw ConfigError(path + ".name: required");
    if (name.find_first_of("/\\ ,\"") != std::string::npos) {
      throw ConfigError(path + ".name: must not contain '/', '\\', ',', quotes or spaces");
    }
    const ExperimentConfig config =
        experiment_from_json(run.contains("config") ? run.at("config") : json::object());
    std::vector<std::uint64_t> seeds;
    if (run.contains("seeds")) {
      read(run, "seeds", path, seeds);
    } else if (run.contains("seed")) {
      std::uint64_t seed = 0;
      read(run, "seed", path, seed);
      seeds.push_back(seed);
    } else {
      seeds.push_back(config.seed);
    }
    for (std::uint64_t seed : seeds) {
      ManifestJob job{name, seed, config};
      job.config.seed = seed;
      if (!seen.insert(job.id()).second) throw ConfigError(path + ": duplicate job id '" + job.id() + "'");
      manifest.jobs.push_back(std::move(job));
    }
  }
  return manifest;
}

}  // namespace poisonbench
