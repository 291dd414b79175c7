#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "poisonbench/agents.hpp"
#include "poisonbench/attackers.hpp"
#include "poisonbench/environments.hpp"

namespace pb = poisonbench;
using pb::EpisodeTape;
using pb::Policy;

namespace {

Policy fixture_target() { return pb::solve_optimal(pb::two_state_fixture()).policy; }  // s0 -> 1, s1 -> 0

EpisodeTape tape(std::initializer_list<EpisodeTape::Step> steps) {
  EpisodeTape t;
  t.steps = steps;
  return t;
}

}  // namespace

TEST(AttackNone, Identity) {
  EXPECT_EQ(pb::attack_none(0, 0, 0), 0);
  EXPECT_EQ(pb::attack_none(3, 1, 4), 4);
  EXPECT_EQ(pb::attack_none(9, 7, 2), 2);
  pb::NoAttack none;
  pb::RandomStream rng(0);
  const auto out = none.intercept(1, 1, 3, rng);
  EXPECT_EQ(out.action, 3);
  EXPECT_EQ(out.weight, 1.0);
  EXPECT_TRUE(none.spares_target());
}

TEST(AttackExchange, SwapsOptimalAndTarget) {
  Policy optimal = Policy::deterministic(1, 2, 3, 0);
  Policy target = Policy::deterministic(1, 2, 3, 1);
  target.set_action(0, 1, 0);  // at s1 target equals optimal
  EXPECT_EQ(pb::attack_exchange(optimal, target, 0, 0, 0), 1);
  EXPECT_EQ(pb::attack_exchange(optimal, target, 0, 0, 1), 0);
  EXPECT_EQ(pb::attack_exchange(optimal, target, 0, 0, 2), 2);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(pb::attack_exchange(optimal, target, 0, 1, a), a);
  EXPECT_FALSE(pb::ExchangeAttack(optimal, target).spares_target());
  EXPECT_THROW(pb::ExchangeAttack(Policy::stochastic(1, 2, 3), target), pb::ModelError);
}

TEST(AttackAlphaPortion, TargetActionUntouchedWithoutRandomness) {
  const Policy target = Policy::deterministic(1, 1, 3, 2);
  const Policy worst = Policy::deterministic(1, 1, 3, 0);
  pb::RandomStream rng(1);
  EXPECT_EQ(pb::attack_alpha_portion(target, worst, 0.5, 0, 0, 2, rng), 2);
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(AttackAlphaPortion, AlphaOneAlwaysWorst) {
  const Policy target = Policy::deterministic(1, 1, 3, 2);
  const Policy worst = Policy::deterministic(1, 1, 3, 0);
  pb::RandomStream rng(2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(pb::attack_alpha_portion(target, worst, 1.0, 0, 0, 1, rng), 0);
}

TEST(AttackAlphaPortion, BinomialFrequency) {
  const Policy target = Policy::deterministic(1, 1, 3, 2);
  const Policy worst = Policy::deterministic(1, 1, 3, 0);
  pb::AlphaPortionAttack attack(target, worst, 0.3);
  pb::RandomStream rng(3);
  const int n = 100000;
  int to_worst = 0, to_target = 0;
  for (int i = 0; i < n; ++i) {
    const int out = attack.intercept(0, 0, 1, rng).action;
    to_worst += out == 0;
    to_target += out == 2;
  }
  EXPECT_EQ(to_worst + to_target, n);
  EXPECT_NEAR(to_worst / double(n), 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
}

TEST(AttackAlphaPortion, RejectsAlphaOutsideUnitInterval) {
  const Policy p = Policy::deterministic(1, 1, 2);
  EXPECT_THROW(pb::AlphaPortionAttack(p, p, 0.0), pb::ModelError);
  EXPECT_THROW(pb::AlphaPortionAttack(p, p, 1.01), pb::ModelError);
  EXPECT_NO_THROW(pb::AlphaPortionAttack(p, p, 1.0));
}

TEST(LcbWidth, ClosedForm) {
  const double iota = 3.0;
  EXPECT_DOUBLE_EQ(pb::lcb_width(4, 5, 7, iota), std::sqrt(2.0 * iota / 7.0));  // last step
  EXPECT_DOUBLE_EQ(pb::lcb_width(0, 5, 7, iota), (4.0 * std::numbers::e + 1.0) * std::sqrt(2.0 * iota / 7.0));
  for (std::int64_t t = 1; t < 50; ++t) EXPECT_GT(pb::lcb_width(2, 5, t, iota), pb::lcb_width(2, 5, t + 1, iota));
  EXPECT_THROW(pb::lcb_width(0, 5, 0, iota), std::invalid_argument);
}

TEST(LcbWidth, GridScaleValue) {
  // First step, H = 10, t = 100, p = 0.05, S = 10, A = 5, T = 1e6:
  // iota = ln(2 * 10 * 5 * 1e6 / 0.05) = ln(2e9); width = (9e + 1) sqrt(2 iota / 100).
  const double iota = pb::log_term(pb::Dims{10, 5, 10}, 1000000, 0.05);
  EXPECT_NEAR(iota, 21.416413017506358, 1e-12);
  EXPECT_NEAR(pb::lcb_width(0, 10, 100, iota), 16.665722247914896, 1e-9);
}

TEST(LcbhState, ConstructionErrors) {
  const Policy target = fixture_target();
  EXPECT_THROW(pb::LcbhState(Policy::deterministic(1, 2, 2), pb::Dims{2, 2, 1}, 10, 0.05), pb::ModelError);
  EXPECT_THROW(pb::LcbhState(Policy::stochastic(2, 2, 2), pb::Dims{2, 2, 2}, 10, 0.05), pb::ModelError);
  EXPECT_THROW(pb::LcbhState(target, pb::Dims{3, 2, 2}, 10, 0.05), pb::ModelError);
  EXPECT_THROW(pb::LcbhState(target, pb::Dims{2, 2, 2}, 10, 1.0), pb::ModelError);
  EXPECT_THROW(pb::LcbhState(target, pb::Dims{2, 2, 2}, 0, 0.05), pb::ModelError);
}

TEST(LcbhState, TargetActionPassesWithUnitWeight) {
  pb::LcbhState st(fixture_target(), pb::Dims{2, 2, 2}, 10, 0.05);
  pb::RandomStream rng(0);
  const auto out = st.intercept(0, 0, 1, rng);
  EXPECT_EQ(out.action, 1);
  EXPECT_EQ(out.weight, 1.0);
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(LcbhState, FreshStateAttackBranchPicksLowestNonTarget) {
  const Policy target = Policy::deterministic(3, 1, 4, 0);
  pb::LcbhState st(target, pb::Dims{1, 4, 3}, 10, 0.05);
  EXPECT_EQ(st.worst_candidate(0, 0), 1);
  pb::RandomStream rng(7);
  bool saw_attack = false;
  for (int i = 0; i < 200; ++i) {
    const auto out = st.intercept(0, 0, 3, rng);
    if (out.weight == 0.0) {
      saw_attack = true;
      EXPECT_EQ(out.action, 1);
    } else {
      EXPECT_EQ(out.action, 0);
      EXPECT_DOUBLE_EQ(out.weight, 1.5);
    }
  }
  EXPECT_TRUE(saw_attack);
}

TEST(LcbhState, ArgminOverLowerBoundsWithMinusInfinityFirst) {
  const Policy target = Policy::deterministic(2, 1, 4, 2);
  pb::LcbhState st(target, pb::Dims{1, 4, 2}, 10, 0.05);
  st.set_lower_bound(0, 0, 0, 0.4);
  st.set_lower_bound(0, 0, 1, 0.1);
  EXPECT_EQ(st.worst_candidate(0, 0), 3);  // still -inf
  st.set_lower_bound(0, 0, 3, 0.1);
  EXPECT_EQ(st.worst_candidate(0, 0), 1);  // tie -> lowest
  st.set_lower_bound(0, 0, 2, -5.0);       // target ignored
  EXPECT_EQ(st.worst_candidate(0, 0), 1);
}

TEST(LcbhState, AttackBranchFrequencyIsOneOverH) {
  const Policy target = Policy::deterministic(10, 1, 3, 0);
  pb::LcbhState st(target, pb::Dims{1, 3, 10}, 100, 0.05);
  pb::RandomStream rng(11);
  const int n = 100000;
  int attacked = 0;
  for (int i = 0; i < n; ++i) attacked += st.intercept(4, 0, 2, rng).weight == 0.0;
  EXPECT_NEAR(attacked / double(n), 0.1, 3 * std::sqrt(0.1 * 0.9 / n));
}

TEST(LcbhState, TwoEpisodeTranscript) {
  const double iota = std::log(2.0 * 2 * 2 * 100 / 0.05);
  pb::LcbhState st(fixture_target(), pb::Dims{2, 2, 2}, 100, 0.05);
  EXPECT_DOUBLE_EQ(st.iota(), iota);

  // Episode 1: target at s0, then non-target at s1 redirected to the target (w = 2).
  st.end_episode(tape({{0, 1, 1, 1.0, 0.0}, {1, 1, 0, 2.0, 1.0}}));
  EXPECT_EQ(st.visits(1, 1, 0), 1);
  EXPECT_DOUBLE_EQ(st.q_hat(1, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.lower_bound(1, 1, 0), 1.0 - std::sqrt(2.0 * iota));
  EXPECT_DOUBLE_EQ(st.q_hat(0, 0, 1), 2.0);  // 0 + 1 * 2
  EXPECT_DOUBLE_EQ(st.lower_bound(0, 0, 1), 2.0 - (std::numbers::e + 1.0) * std::sqrt(2.0 * iota));

  // Episode 2: second step sent to a non-target action (w = 0) annihilates the future return.
  st.end_episode(tape({{0, 1, 1, 1.0, 1.0}, {1, 1, 1, 0.0, 1.0}}));
  EXPECT_DOUBLE_EQ(st.q_hat(1, 1, 1), 1.0);
  EXPECT_EQ(st.visits(0, 0, 1), 2);
  EXPECT_DOUBLE_EQ(st.q_hat(0, 0, 1), 1.5);  // mean of 2 and 1 + 1 * 0
  EXPECT_NEAR(st.lower_bound(0, 0, 1), 1.5 - (std::numbers::e + 1.0) * std::sqrt(iota), 1e-12);

  // Untouched cells stay at -inf.
  EXPECT_TRUE(std::isinf(st.lower_bound(0, 1, 0)));
  EXPECT_EQ(st.visits(0, 1, 0), 0);
}

TEST(LcbhState, OnPolicyTapeGivesReturnToGo) {
  const Policy target = Policy::deterministic(3, 1, 2, 0);
  pb::LcbhState st(target, pb::Dims{1, 2, 3}, 10, 0.05);
  st.end_episode(tape({{0, 0, 0, 1.0, 0.5}, {0, 0, 0, 1.0, 0.25}, {0, 0, 0, 1.0, 1.0}}));
  EXPECT_DOUBLE_EQ(st.q_hat(2, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.q_hat(1, 0, 0), 1.25);
  EXPECT_DOUBLE_EQ(st.q_hat(0, 0, 0), 1.75);
}

TEST(LcbhState, ZeroWeightLaterZeroesFuture) {
  const Policy target = Policy::deterministic(3, 1, 2, 0);
  pb::LcbhState st(target, pb::Dims{1, 2, 3}, 10, 0.05);
  st.end_episode(tape({{0, 0, 0, 1.0, 0.5}, {0, 1, 0, 1.5, 0.25}, {0, 1, 1, 0.0, 1.0}}));
  EXPECT_DOUBLE_EQ(st.q_hat(1, 0, 0), 0.25);
  EXPECT_DOUBLE_EQ(st.q_hat(0, 0, 0), 0.5);
}

TEST(LcbhState, IncompleteTapeRejected) {
  pb::LcbhState st(fixture_target(), pb::Dims{2, 2, 2}, 10, 0.05);
  EXPECT_THROW(st.end_episode(tape({{0, 1, 1, 1.0, 0.0}})), std::invalid_argument);
}

TEST(LcbhState, RunningMeanIsExact) {
  const int H = 3;
  const Policy target = Policy::deterministic(H, 2, 3, 0);
  pb::LcbhState st(target, pb::Dims{2, 3, H}, 1000, 0.05);
  pb::RandomStream rng(21);
  std::map<std::tuple<int, int, int>, std::pair<double, int>> sums;
  const double weights[] = {1.0, 0.0, 1.5};
  for (int k = 0; k < 300; ++k) {
    EpisodeTape t;
    for (int h = 0; h < H; ++h) {
      const int kind = static_cast<int>(rng.uniform_int(3));
      const int s = static_cast<int>(rng.uniform_int(2));
      const int exec = kind == 1 ? 1 + static_cast<int>(rng.uniform_int(2)) : 0;
      t.steps.push_back({s, kind == 0 ? 0 : 1, exec, weights[kind], rng.uniform()});
    }
    double g = 0.0, rho = 1.0;
    for (int h = H - 1; h >= 0; --h) {
      const auto& step = t.steps[static_cast<std::size_t>(h)];
      auto& acc = sums[{h, step.state, step.executed_action}];
      acc.first += step.reward + g * rho;
      acc.second += 1;
      g += step.reward;
      rho *= step.weight;
    }
    st.end_episode(t);
  }
  for (const auto& [key, acc] : sums) {
    const auto [h, s, a] = key;
    EXPECT_EQ(st.visits(h, s, a), acc.second);
    EXPECT_NEAR(st.q_hat(h, s, a), acc.first / acc.second, 1e-9);
    EXPECT_NEAR(st.lower_bound(h, s, a), st.q_hat(h, s, a) - st.width(h, acc.second), 1e-12);
  }
}

TEST(LcbhState, ImportanceRatioBoundedByE) {
  for (int H = 2; H <= 20; ++H) {
    const double w = H / (H - 1.0);
    EXPECT_LE(std::pow(w, H - 1), std::numbers::e);
  }
}

TEST(LcbhAttack, FrozenKeepsLowerBounds) {
  pb::LcbhAttack attack(fixture_target(), pb::Dims{2, 2, 2}, 10, 0.05);
  attack.set_frozen(true);
  attack.observe(0, 0, 1, {1, 1.0}, 1.0, 0);
  attack.observe(1, 0, 1, {1, 1.0}, 1.0, 1);
  attack.end_episode();
  EXPECT_EQ(attack.state().visits(0, 0, 1), 1);
  EXPECT_DOUBLE_EQ(attack.state().q_hat(0, 0, 1), 2.0);
  EXPECT_TRUE(std::isinf(attack.state().lower_bound(0, 0, 1)));
  attack.set_frozen(false);
  attack.observe(0, 0, 1, {1, 1.0}, 0.0, 0);
  attack.observe(1, 0, 1, {1, 1.0}, 0.0, 1);
  attack.end_episode();
  EXPECT_FALSE(std::isinf(attack.state().lower_bound(0, 0, 1)));
  EXPECT_TRUE(attack.spares_target());
  EXPECT_EQ(attack.name(), "lcbh");
}
