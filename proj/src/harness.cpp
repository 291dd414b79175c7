#include "poisonbench/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "poisonbench/environments.hpp"
#include "poisonbench/serialization.hpp"

namespace poisonbench {

using nlohmann::json;

namespace {

MdpSpec build_environment(const EnvironmentConfig& env) {
  MdpSpec spec;
  switch (env.kind) {
    case EnvironmentKind::grid1d: spec = gen_periodic_1d(env.grid1d); break;
    case EnvironmentKind::grid2d: spec = gen_gridworld_2d(); break;
    case EnvironmentKind::random: spec = gen_random_mdp(env.num_states, env.num_actions, env.horizon, env.seed); break;
    case EnvironmentKind::two_state: spec = two_state_fixture(); break;
    case EnvironmentKind::file: spec = load_mdp(env.path); break;
  }
  if (env.reward_noise) spec.set_reward_noise(*env.reward_noise);
  require_valid(spec);
  return spec;
}

Policy build_target(const TargetConfig& target, const MdpSpec& spec) {
  switch (target.source) {
    case TargetSource::generated:
      try {
        return gen_target_policy(spec, target.seed);
      } catch (const ModelError& e) {
        throw ConfigError(std::string("target: ") + e.what());
      }
    case TargetSource::optimal: return solve_optimal(spec).policy;
    case TargetSource::grid2d:
      if (spec.dims() != Dims{kGrid2dStates, kGrid2dActions, kGrid2dHorizon}) {
        throw ConfigError("target: source 'grid2d' needs the 2-d grid environment");
      }
      return gridworld_2d_target_policy();
    case TargetSource::table: {
      auto pi = policy_from_json(json(target.actions), spec.num_actions());
      if (pi.horizon() != spec.horizon() || pi.num_states() != spec.num_states()) {
        throw ConfigError("target: action table must be H x S");
      }
      return pi;
    }
    case TargetSource::file: {
      std::ifstream in(target.path);
      if (!in) throw ConfigError("target: cannot open " + target.path);
      json doc;
      in >> doc;
      auto pi = policy_from_json(doc, spec.num_actions());
      if (pi.horizon() != spec.horizon() || pi.num_states() != spec.num_states()) {
        throw ConfigError("target: policy file dimensions do not match the environment");
      }
      return pi;
    }
  }
  throw ConfigError("target: unknown source");
}

}  // namespace

Experiment prepare_experiment(MdpSpec spec, Policy target) {
  require_valid(spec);
  if (!target.is_deterministic()) throw ModelError("target policy must be deterministic");
  const auto issues = validate_policy(target, spec.horizon(), spec.num_states(), spec.num_actions());
  if (!issues.empty()) throw ModelError("target policy: " + issues.front().message);
  Experiment ex;
  ex.optimal = solve_optimal(spec);
  ex.target_values = evaluate_policy(spec, target);
  ex.worst = worst_action_policy(spec, target);
  ex.target_admissible = check_target_admissible(spec, target);
  ex.spec = std::move(spec);
  ex.target = std::move(target);
  return ex;
}

Experiment prepare_experiment(const ExperimentConfig& config) {
  MdpSpec spec = build_environment(config.environment);
  Policy target = build_target(config.target, spec);
  return prepare_experiment(std::move(spec), std::move(target));
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const Experiment& experiment, std::int64_t total_steps) {
  const Dims dims = experiment.spec.dims();
  switch (config.kind) {
    case AgentKind::ucbh: return std::make_unique<UcbhAgent>(dims, total_steps, config.ucb);
    case AgentKind::ucbb: return std::make_unique<UcbbAgent>(dims, total_steps, config.ucb);
    case AgentKind::optimal_policy: return std::make_unique<PolicyAgent>(experiment.optimal.policy);
    case AgentKind::target_policy: return std::make_unique<PolicyAgent>(experiment.target);
    case AgentKind::uniform:
      return std::make_unique<PolicyAgent>(Policy::stochastic(dims.horizon, dims.num_states, dims.num_actions));
  }
  throw ConfigError("agent: unknown kind");
}

std::unique_ptr<Attacker> make_attacker(const AttackerConfig& config, const Experiment& experiment,
                                        std::int64_t total_steps) {
  const Dims dims = experiment.spec.dims();
  switch (config.kind) {
    case AttackerKind::none: return std::make_unique<NoAttack>();
    case AttackerKind::exchange: return std::make_unique<ExchangeAttack>(experiment.optimal.policy, experiment.target);
    case AttackerKind::alpha_portion: {
      if (!experiment.target_admissible) throw ConfigError("attacker: target policy is not admissible");
      const double alpha = config.alpha.value_or(1.0 / dims.horizon);
      return std::make_unique<AlphaPortionAttack>(experiment.target, experiment.worst, alpha);
    }
    case AttackerKind::lcbh:
      return std::make_unique<LcbhAttack>(experiment.target, dims, total_steps, config.p);
  }
  throw ConfigError("attacker: unknown kind");
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t episodes, int count) {
  std::vector<std::int64_t> points;
  if (episodes < 1) return points;
  const double top = std::log10(static_cast<double>(episodes));
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    auto k = static_cast<std::int64_t>(std::llround(std::pow(10.0, top * frac)));
    points.push_back(std::clamp<std::int64_t>(k, 1, episodes));
  }
  points.push_back(episodes);
  if (episodes >= 10) points.push_back(episodes / 10);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

RunStreams::RunStreams(std::uint64_t master_seed)
    : environment(RandomStream(master_seed).split("environment")),
      agent(RandomStream(master_seed).split("agent")),
      attacker(RandomStream(master_seed).split("attacker")),
      initial_state(RandomStream(master_seed).split("initial_state")) {}

MetricsSeries run_episodes(const Experiment& experiment, Agent& agent, Attacker& attacker, const RunOptions& options,
                           RunObserver* observer) {
  if (options.episodes < 1) throw ConfigError("episodes must be at least 1");
  const MdpSpec& spec = experiment.spec;
  const Policy& target = experiment.target;
  const ValueTables& optimal = experiment.optimal.values;
  const int H = spec.horizon();

  MetricsSeries series;
  series.run_id = options.run_id;
  series.seed = options.seed;
  series.attacker = std::string(attacker.name());
  series.horizon = H;

  const auto schedule = checkpoint_schedule(options.episodes, options.checkpoints);
  series.checkpoints.reserve(schedule.size());
  auto next_checkpoint = schedule.begin();

  const auto tail_episodes = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(options.tail_fraction * static_cast<double>(options.episodes))));
  series.tail.first_episode = options.episodes - std::min(tail_episodes, options.episodes) + 1;

  RunStreams streams(options.seed);
  Checkpoint totals;
  TailStats& tail = series.tail;
  StepEvent event;

  for (std::int64_t k = 1; k <= options.episodes; ++k) {
    const bool in_tail = k >= tail.first_episode;
    int s = sample_initial_state(spec, streams.initial_state);
    totals.cum_optimal_value += optimal.v(0, s);
    for (int h = 0; h < H; ++h) {
      const int a = agent.choose(h, s, streams.agent);
      const Interception executed = attacker.intercept(h, s, a, streams.attacker);
      const StepOutcome outcome = sample_step(spec, h, s, executed.action, streams.environment);
      agent.observe(h, s, a, outcome.reward, outcome.next_state);
      attacker.observe(h, s, a, executed, outcome.reward, outcome.next_state);

      const int loss = loss_increment(a, target, h, s);
      const int cost = cost_increment(a, executed.action);
      const int nonopt = nonopt_increment(optimal, h, s, a);
      totals.loss += loss;
      totals.cost += cost;
      totals.nonopt += nonopt;
      totals.cum_return += outcome.reward;
      if (in_tail) {
        ++tail.steps;
        tail.target_follow += 1 - loss;
        tail.optimal += 1 - nonopt;
        tail.loss += loss;
        tail.cost += cost;
      }
      if (observer) {
        event.episode = k;
        event.h = h;
        event.state = s;
        event.agent_action = a;
        event.executed = executed;
        event.reward = outcome.reward;
        event.next_state = outcome.next_state;
        observer->on_step(event);
      }
      s = outcome.next_state;
    }
    attacker.end_episode();
    if (observer) observer->on_episode_end(k);
    if (next_checkpoint != schedule.end() && *next_checkpoint == k) {
      totals.episodes = k;
      totals.steps = k * H;
      series.checkpoints.push_back(totals);
      if (observer) observer->on_checkpoint(totals);
      ++next_checkpoint;
    }
  }
  return series;
}

std::string config_hash(const ExperimentConfig& config) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(experiment_to_json(config).dump());
  return os.str();
}

RunResult execute_experiment(const ExperimentConfig& config, RunObserver* observer, const std::string& run_id) {
  const Experiment experiment = prepare_experiment(config);
  const std::int64_t total_steps = config.episodes * experiment.spec.horizon();
  RunResult result;
  result.agent = make_agent(config.agent, experiment, total_steps);
  result.attacker = make_attacker(config.attacker, experiment, total_steps);
  RunOptions options;
  options.episodes = config.episodes;
  options.checkpoints = config.checkpoints;
  options.tail_fraction = config.tail_fraction;
  options.seed = config.seed;
  options.run_id = run_id;
  result.series = run_episodes(experiment, *result.agent, *result.attacker, options, observer);
  result.series.config_hash = config_hash(config);
  return result;
}

MetricsSeries run_experiment(const ExperimentConfig& config, RunObserver* observer, const std::string& run_id) {
  return execute_experiment(config, observer, run_id).series;
}

std::vector<double> regret_series(const MetricsSeries& series) {
  if (series.attacked()) throw std::logic_error("regret_series: only defined for runs without an attacker");
  std::vector<double> out;
  out.reserve(series.checkpoints.size());
  for (const auto& c : series.checkpoints) out.push_back(c.cum_optimal_value - c.cum_return);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

void write_metrics_csv(const MetricsSeries& series, std::ostream& out) {
  const bool with_regret = !series.attacked();
  out << "run_id,seed,checkpoint_step,episodes,loss,cost,nonopt_pulls,cum_return";
  if (with_regret) out << ",proxy_regret";
  out << '\n';
  for (const auto& c : series.checkpoints) {
    out << series.run_id << ',' << series.seed << ',' << c.steps << ',' << c.episodes << ',' << c.loss << ','
        << c.cost << ',' << c.nonopt << ',' << format_double(c.cum_return);
    if (with_regret) out << ',' << format_double(c.cum_optimal_value - c.cum_return);
    out << '\n';
  }
}

json metrics_sidecar(const ExperimentConfig& config, const MetricsSeries& series) {
  const auto& last = series.final_totals();
  return json{{"run_id", series.run_id},
              {"seed", series.seed},
              {"config_hash", series.config_hash},
              {"config", experiment_to_json(config)},
              {"final",
               {{"episodes", last.episodes},
                {"steps", last.steps},
                {"loss", last.loss},
                {"cost", last.cost},
                {"nonopt_pulls", last.nonopt},
                {"cum_return", last.cum_return},
                {"cum_optimal_value", last.cum_optimal_value}}},
              {"tail",
               {{"first_episode", series.tail.first_episode},
                {"steps", series.tail.steps},
                {"target_follow", series.tail.target_follow},
                {"optimal", series.tail.optimal},
                {"loss", series.tail.loss},
                {"cost", series.tail.cost},
                {"target_follow_rate", series.tail.target_follow_rate()},
                {"optimal_rate", series.tail.optimal_rate()}}}};
}

}  // namespace poisonbench
