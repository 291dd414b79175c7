#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "poisonbench/environments.hpp"
#include "poisonbench/harness.hpp"
#include "poisonbench/summary.hpp"

namespace pb = poisonbench;
using nlohmann::json;

namespace {

pb::ExperimentConfig two_state_config(const std::string& agent, const std::string& attacker, std::int64_t episodes,
                                      std::uint64_t seed) {
  return pb::experiment_from_json(json{{"environment", {{"kind", "two_state"}}},
                                       {"target", {{"source", "generated"}, {"seed", 3}}},
                                       {"agent", {{"kind", agent}, {"c", 0.02}}},
                                       {"attacker", {{"kind", attacker}}},
                                       {"episodes", episodes},
                                       {"seed", seed}});
}

/// Re-derives every counter from the raw step stream.
class TapeScan : public pb::RunObserver {
 public:
  explicit TapeScan(const pb::Experiment& ex) : ex_(ex) {}
  void on_step(const pb::StepEvent& e) override {
    ++steps;
    loss += e.agent_action != ex_.target.action(e.h, e.state);
    cost += e.executed.action != e.agent_action;
    nonopt += ex_.optimal.values.q(e.h, e.state, e.agent_action) < ex_.optimal.values.v(e.h, e.state);
    ret += e.reward;
    if (e.agent_action == ex_.target.action(e.h, e.state)) EXPECT_EQ(e.executed.action, e.agent_action);
  }
  void on_episode_end(std::int64_t episode) override { EXPECT_EQ(episode, ++episodes); }

  std::int64_t steps = 0, loss = 0, cost = 0, nonopt = 0, episodes = 0;
  double ret = 0.0;

 private:
  const pb::Experiment& ex_;
};

}  // namespace

TEST(CheckpointSchedule, LogSpacedWithEndpointsAndTenth) {
  const auto pts = pb::checkpoint_schedule(100000, 50);
  EXPECT_EQ(pts.front(), 1);
  EXPECT_EQ(pts.back(), 100000);
  EXPECT_NE(std::find(pts.begin(), pts.end(), 10000), pts.end());
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_EQ(std::adjacent_find(pts.begin(), pts.end()), pts.end());
  EXPECT_EQ(pb::checkpoint_schedule(1, 50), std::vector<std::int64_t>{1});
  EXPECT_EQ(pb::checkpoint_schedule(5, 1), std::vector<std::int64_t>{5});
  EXPECT_TRUE(pb::checkpoint_schedule(0, 5).empty());
}

TEST(RunEpisodes, TargetFollowingAgentIsNeverAttacked) {
  auto config = two_state_config("target_policy", "alpha_portion", 500, 1);
  const auto series = pb::run_experiment(config);
  EXPECT_EQ(series.final_totals().loss, 0);
  EXPECT_EQ(series.final_totals().cost, 0);
  EXPECT_EQ(series.final_totals().episodes, 500);
  EXPECT_EQ(series.final_totals().steps, 1000);
  EXPECT_DOUBLE_EQ(series.tail.target_follow_rate(), 1.0);
}

TEST(RunEpisodes, DeterministicGivenSeed) {
  for (const char* attacker : {"none", "alpha_portion", "lcbh", "exchange"}) {
    const auto config = two_state_config("ucbh", attacker, 2000, 17);
    std::ostringstream a, b;
    pb::write_metrics_csv(pb::run_experiment(config), a);
    pb::write_metrics_csv(pb::run_experiment(config), b);
    EXPECT_EQ(a.str(), b.str()) << attacker;
    std::ostringstream c;
    pb::write_metrics_csv(pb::run_experiment(two_state_config("ucbh", attacker, 2000, 18)), c);
    EXPECT_NE(a.str(), c.str()) << attacker;
  }
}

TEST(RunEpisodes, CountersMatchStepStream) {
  for (const char* attacker : {"none", "alpha_portion", "lcbh", "exchange"}) {
    const auto config = two_state_config("ucbh", attacker, 3000, 5);
    const pb::Experiment ex = pb::prepare_experiment(config);
    TapeScan scan(ex);
    auto agent = pb::make_agent(config.agent, ex, 6000);
    auto att = pb::make_attacker(config.attacker, ex, 6000);
    pb::RunOptions opts;
    opts.episodes = 3000;
    opts.seed = 5;
    const auto series = pb::run_episodes(ex, *agent, *att, opts, &scan);
    const auto& last = series.final_totals();
    EXPECT_EQ(scan.steps, last.steps);
    EXPECT_EQ(scan.loss, last.loss);
    EXPECT_EQ(scan.cost, last.cost);
    EXPECT_EQ(scan.nonopt, last.nonopt);
    EXPECT_NEAR(scan.ret, last.cum_return, 1e-9);
    EXPECT_EQ(scan.episodes, 3000);
    if (att->spares_target()) EXPECT_LE(last.cost, last.loss) << attacker;
    std::int64_t prev = 0;
    for (const auto& c : series.checkpoints) {
      EXPECT_GE(c.loss, prev);
      prev = c.loss;
      EXPECT_EQ(c.steps, 2 * c.episodes);
    }
  }
}

TEST(RegretSeries, RejectsAttackedRuns) {
  const auto series = pb::run_experiment(two_state_config("ucbh", "lcbh", 50, 1));
  EXPECT_THROW(pb::regret_series(series), std::logic_error);
}

TEST(RegretSeries, OptimalAgentOnDeterministicRewardsHasZeroRegret) {
  auto config = two_state_config("optimal_policy", "none", 400, 2);
  config.environment.reward_noise = pb::RewardNoise::deterministic;
  const auto series = pb::run_experiment(config);
  for (double r : pb::regret_series(series)) EXPECT_NEAR(r, 0.0, 1e-9);
  EXPECT_EQ(series.final_totals().nonopt, 0);
}

TEST(RegretSeries, ScriptedSuboptimalPolicyMatchesValueGap) {
  // Always action 0: from s0 the return is 0.2 + 0.3 against 1.3 optimal; from s1 it is optimal.
  const pb::MdpSpec spec = pb::two_state_fixture();
  const pb::Policy lazy = pb::Policy::deterministic(2, 2, 2, 0);
  const pb::Experiment ex = pb::prepare_experiment(spec, pb::solve_optimal(spec).policy);
  const double gap = 0.5 * (1.3 - 0.5);
  const std::int64_t K = 1000;
  std::vector<double> finals;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    pb::PolicyAgent agent(lazy);
    pb::NoAttack none;
    pb::RunOptions opts;
    opts.episodes = K;
    opts.seed = seed;
    finals.push_back(pb::regret_series(pb::run_episodes(ex, agent, none, opts)).back());
  }
  const auto stats = pb::mean_std(finals);
  EXPECT_NEAR(stats.mean, K * gap, 3.0 * stats.std / std::sqrt(20.0));
}

TEST(MetricsCsv, HeaderDependsOnAttack) {
  std::ostringstream plain, attacked;
  pb::write_metrics_csv(pb::run_experiment(two_state_config("ucbh", "none", 30, 1), nullptr, "base"), plain);
  pb::write_metrics_csv(pb::run_experiment(two_state_config("ucbh", "lcbh", 30, 1), nullptr, "lcb"), attacked);
  const auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  EXPECT_EQ(first_line(plain.str()),
            "run_id,seed,checkpoint_step,episodes,loss,cost,nonopt_pulls,cum_return,proxy_regret");
  EXPECT_EQ(first_line(attacked.str()), "run_id,seed,checkpoint_step,episodes,loss,cost,nonopt_pulls,cum_return");
  std::istringstream in(attacked.str());
  const auto rows = pb::read_metrics_csv(in);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().run_id, "lcb");
  EXPECT_EQ(rows.back().episodes, 30);
  EXPECT_FALSE(rows.back().proxy_regret.has_value());
}

TEST(MetricsSidecar, CarriesResolvedConfigAndHash) {
  const auto config = two_state_config("ucbh", "alpha_portion", 40, 9);
  const auto series = pb::run_experiment(config, nullptr, "side");
  const auto doc = pb::metrics_sidecar(config, series);
  EXPECT_EQ(doc.at("run_id"), "side");
  EXPECT_EQ(doc.at("seed"), 9);
  EXPECT_EQ(doc.at("config"), pb::experiment_to_json(config));
  EXPECT_EQ(doc.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(doc.at("config_hash"), pb::config_hash(config));
  auto other = config;
  other.seed = 10;
  EXPECT_NE(pb::config_hash(other), pb::config_hash(config));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(pb::format_double(0.1), "0.1");
  EXPECT_EQ(pb::format_double(2.0), "2");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(pb::format_double(x)), x);
}

TEST(PrepareExperiment, AlphaPortionNeedsAdmissibleTarget) {
  auto config = pb::experiment_from_json(json{{"environment", {{"kind", "grid2d"}}},
                                              {"target", {{"source", "grid2d"}}},
                                              {"attacker", {{"kind", "alpha_portion"}}}});
  const auto ex = pb::prepare_experiment(config);
  EXPECT_FALSE(ex.target_admissible);
  EXPECT_THROW(pb::make_attacker(config.attacker, ex, 100), pb::ConfigError);
  config.attacker.kind = pb::AttackerKind::lcbh;
  EXPECT_NO_THROW(pb::make_attacker(config.attacker, ex, 100));
}

TEST(PrepareExperiment, Grid2dTargetNeedsGridEnvironment) {
  const auto config = pb::experiment_from_json(json{{"environment", {{"kind", "two_state"}}},
                                                    {"target", {{"source", "grid2d"}}}});
  EXPECT_THROW(pb::prepare_experiment(config), pb::ConfigError);
}

TEST(PrepareExperiment, TableTargetShapeChecked) {
  auto config = pb::experiment_from_json(json{{"environment", {{"kind", "two_state"}}},
                                              {"target", {{"source", "table"}, {"actions", {{1, 0}, {1, 0}}}}}});
  const auto ex = pb::prepare_experiment(config);
  EXPECT_EQ(ex.target, pb::solve_optimal(pb::two_state_fixture()).policy);
  config.target.actions = {{1, 0}};
  EXPECT_THROW(pb::prepare_experiment(config), pb::ConfigError);
}
