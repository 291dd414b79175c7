#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisonbench/agents.hpp"
#include "poisonbench/attackers.hpp"
#include "poisonbench/config.hpp"
#include "poisonbench/mdp.hpp"

namespace poisonbench {

/// Everything a run needs that is fixed before the first episode.
struct Experiment {
  MdpSpec spec;
  Policy target;
  OptimalSolution optimal;
  ValueTables target_values;
  Policy worst;  ///< argmin of the target policy's Q; only meaningful when admissible
  bool target_admissible = false;
};

/// Builds the environment and target policy; throws ConfigError on admissibility
/// failures for attackers that need an admissible target.
Experiment prepare_experiment(const ExperimentConfig& config);
/// Same, for an already-built spec and target.
Experiment prepare_experiment(MdpSpec spec, Policy target);

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const Experiment& experiment, std::int64_t total_steps);
std::unique_ptr<Attacker> make_attacker(const AttackerConfig& config, const Experiment& experiment,
                                        std::int64_t total_steps);

struct Checkpoint {
  std::int64_t episodes = 0;
  std::int64_t steps = 0;
  std::int64_t loss = 0;
  std::int64_t cost = 0;
  std::int64_t nonopt = 0;
  double cum_return = 0.0;
  double cum_optimal_value = 0.0;  ///< sum over episodes of V*_1(s_1)
};

/// Counts over the final `tail_fraction` of episodes.
struct TailStats {
  std::int64_t first_episode = 0;
  std::int64_t steps = 0;
  std::int64_t target_follow = 0;
  std::int64_t optimal = 0;
  std::int64_t loss = 0;
  std::int64_t cost = 0;

  [[nodiscard]] double target_follow_rate() const noexcept {
    return steps > 0 ? static_cast<double>(target_follow) / static_cast<double>(steps) : 0.0;
  }
  [[nodiscard]] double optimal_rate() const noexcept {
    return steps > 0 ? static_cast<double>(optimal) / static_cast<double>(steps) : 0.0;
  }
};

struct MetricsSeries {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string attacker;
  int horizon = 0;
  std::vector<Checkpoint> checkpoints;
  TailStats tail;

  [[nodiscard]] const Checkpoint& final_totals() const { return checkpoints.back(); }
  [[nodiscard]] bool attacked() const noexcept { return attacker != "none"; }
};

struct RunOptions {
  std::int64_t episodes = 1;
  int checkpoints = 50;
  double tail_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string run_id = "run";
};

struct StepEvent {
  std::int64_t episode = 0;  ///< 1-based
  int h = 0;
  int state = 0;
  int agent_action = 0;
  Interception executed;
  double reward = 0.0;
  int next_state = 0;
};

/// Optional hooks into the interaction loop.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_step(const StepEvent&) {}
  /// Fires after the attacker's end-of-episode update.
  virtual void on_episode_end(std::int64_t /*episode*/) {}
  virtual void on_checkpoint(const Checkpoint&) {}
};

/**
 * Episode indices (1-based) at which metrics are recorded: `count` points
 * log-spaced over [1, episodes], always including the last episode and,
 * when episodes >= 10, episodes / 10.
 */
std::vector<std::int64_t> checkpoint_schedule(std::int64_t episodes, int count);

/// Independent named streams derived from one master seed.
struct RunStreams {
  RandomStream environment;
  RandomStream agent;
  RandomStream attacker;
  RandomStream initial_state;

  explicit RunStreams(std::uint64_t master_seed);
};

/**
 * Agent / attacker / environment loop. Per step: the agent chooses a, the
 * attacker maps it to the executed action, the environment samples
 * (r, s') for the executed action, the agent learns from (s, a, r, s') and
 * the attacker records the step. The attacker's end-of-episode hook runs
 * after step H.
 */
MetricsSeries run_episodes(const Experiment& experiment, Agent& agent, Attacker& attacker, const RunOptions& options,
                           RunObserver* observer = nullptr);

/// A finished run together with the learner and attacker in their final state.
struct RunResult {
  MetricsSeries series;
  std::unique_ptr<Agent> agent;
  std::unique_ptr<Attacker> attacker;
};

RunResult execute_experiment(const ExperimentConfig& config, RunObserver* observer = nullptr,
                             const std::string& run_id = "run");
MetricsSeries run_experiment(const ExperimentConfig& config, RunObserver* observer = nullptr,
                             const std::string& run_id = "run");

inline int loss_increment(int a, const Policy& target, int h, int s) { return a != target.action(h, s) ? 1 : 0; }
inline int cost_increment(int a, int executed) noexcept { return executed != a ? 1 : 0; }
/// 1 iff Q*_h(s, a) < V*_h(s), strictly.
inline int nonopt_increment(const ValueTables& optimal, int h, int s, int a) noexcept {
  return optimal.q(h, s, a) < optimal.v(h, s) ? 1 : 0;
}

/// Cumulative sum of V*_1(s_1^k) minus cumulative realized return, per checkpoint.
/// Throws std::logic_error for attacked runs.
std::vector<double> regret_series(const MetricsSeries& series);

std::string config_hash(const ExperimentConfig& config);

/// Header: run_id,seed,checkpoint_step,episodes,loss,cost,nonopt_pulls,cum_return[,proxy_regret].
void write_metrics_csv(const MetricsSeries& series, std::ostream& out);

/// Resolved config plus run metadata, final totals and tail statistics.
nlohmann::json metrics_sidecar(const ExperimentConfig& config, const MetricsSeries& series);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace poisonbench
