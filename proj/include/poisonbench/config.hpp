#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisonbench/agents.hpp"
#include "poisonbench/environments.hpp"

namespace poisonbench {

/// Configuration or manifest problem; the message carries the JSON path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvironmentKind { grid1d, grid2d, random, two_state, file };
enum class TargetSource { generated, optimal, grid2d, table, file };
enum class AgentKind { ucbh, ucbb, optimal_policy, target_policy, uniform };
enum class AttackerKind { none, exchange, alpha_portion, lcbh };

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::grid1d;
  Grid1dParams grid1d;
  // random
  int num_states = 4;
  int num_actions = 3;
  int horizon = 3;
  std::uint64_t seed = 0;
  // file
  std::string path;
  std::optional<RewardNoise> reward_noise;
};

struct TargetConfig {
  TargetSource source = TargetSource::generated;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> actions;  ///< [h][s], source = table
  std::string path;                       ///< source = file
};

struct AgentConfig {
  AgentKind kind = AgentKind::ucbh;
  UcbConfig ucb;
};

struct AttackerConfig {
  AttackerKind kind = AttackerKind::none;
  std::optional<double> alpha;  ///< unset means 1/H
  double p = 0.05;
};

struct ExperimentConfig {
  EnvironmentConfig environment;
  TargetConfig target;
  AgentConfig agent;
  AttackerConfig attacker;
  std::int64_t episodes = 1000;
  std::uint64_t seed = 0;
  int checkpoints = 50;
  double tail_fraction = 0.1;
};

/**
 * Parses an experiment document. Every key is optional; unknown keys are
 * rejected so typos surface as errors.
 *
 *   {
 *     "environment": {"kind": "grid1d", "num_states": 10, "num_actions": 5,
 *                     "horizon": 10, "p_low": 0.5, "p_high": 1.0,
 *                     "reward_levels": [...], "seed": 1,
 *                     "reward_noise": "bernoulli"},
 *     "target":   {"source": "generated", "seed": 7},
 *     "agent":    {"kind": "ucbh", "c": 2.0, "p": 0.05, "q_init": "optimistic"},
 *     "attacker": {"kind": "lcbh", "p": 0.05},
 *     "episodes": 100000, "seed": 42, "checkpoints": 50, "tail_fraction": 0.1
 *   }
 */
ExperimentConfig experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

std::string to_string(EnvironmentKind kind);
std::string to_string(TargetSource source);
std::string to_string(AgentKind kind);
std::string to_string(AttackerKind kind);

struct ManifestJob {
  std::string name;
  std::uint64_t seed = 0;
  ExperimentConfig config;
  [[nodiscard]] std::string id() const { return name + "_s" + std::to_string(seed); }
};

/**
 * List of jobs. Document form:
 *   {"out_dir": "...", "jobs": 4,
 *    "runs": [{"name": "lcbh", "seeds": [1, 2, 3], "config": {...}}]}
 * Each (name, seed) pair becomes one job; a run may give "seed" instead of
 * "seeds", and defaults to the config's own seed.
 */
struct RunManifest {
  std::vector<ManifestJob> jobs;
  std::string out_dir;
  int parallelism = 1;
};

RunManifest manifest_from_json(const nlohmann::json& doc);

}  // namespace poisonbench
