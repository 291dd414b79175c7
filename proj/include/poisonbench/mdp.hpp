#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poisonbench/random.hpp"

namespace poisonbench {

// Steps are 0-based throughout the library: h = 0 is the first step of an
// episode and h = H - 1 the last. Value tables carry one extra step, H,
// whose values are identically zero.

enum class RewardNoise { bernoulli, deterministic };

struct Dims {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Thrown when a model, policy or table does not satisfy its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Finite-horizon tabular MDP with step-dependent dynamics.
 *
 * Storage is dense: transitions are H x S x A x S, mean rewards H x S x A.
 * A freshly constructed spec has zero rewards, self-loop transitions and a
 * uniform initial distribution, so it is valid until edited.
 */
class MdpSpec {
 public:
  MdpSpec() = default;
  MdpSpec(int num_states, int num_actions, int horizon);

  [[nodiscard]] int num_states() const noexcept { return states_; }
  [[nodiscard]] int num_actions() const noexcept { return actions_; }
  [[nodiscard]] int horizon() const noexcept { return horizon_; }
  [[nodiscard]] Dims dims() const noexcept { return {states_, actions_, horizon_}; }

  [[nodiscard]] std::span<const double> transition(int h, int s, int a) const noexcept {
    return {transitions_.data() + row_offset(h, s, a) * states_, static_cast<std::size_t>(states_)};
  }
  [[nodiscard]] std::span<double> transition(int h, int s, int a) noexcept {
    return {transitions_.data() + row_offset(h, s, a) * states_, static_cast<std::size_t>(states_)};
  }

  [[nodiscard]] double reward(int h, int s, int a) const noexcept { return rewards_[row_offset(h, s, a)]; }
  double& reward(int h, int s, int a) noexcept { return rewards_[row_offset(h, s, a)]; }

  [[nodiscard]] std::span<const double> initial_dist() const noexcept { return initial_; }
  [[nodiscard]] std::span<double> initial_dist() noexcept { return initial_; }

  [[nodiscard]] RewardNoise reward_noise() const noexcept { return noise_; }
  void set_reward_noise(RewardNoise noise) noexcept { noise_ = noise; }

  [[nodiscard]] bool contains(int h, int s, int a) const noexcept {
    return h >= 0 && h < horizon_ && s >= 0 && s < states_ && a >= 0 && a < actions_;
  }

  // Raw access for serialization.
  [[nodiscard]] const std::vector<double>& transition_data() const noexcept { return transitions_; }
  [[nodiscard]] const std::vector<double>& reward_data() const noexcept { return rewards_; }

  friend bool operator==(const MdpSpec&, const MdpSpec&) = default;

 private:
  [[nodiscard]] std::size_t row_offset(int h, int s, int a) const noexcept {
    return (static_cast<std::size_t>(h) * states_ + s) * actions_ + a;
  }

  int states_ = 0;
  int actions_ = 0;
  int horizon_ = 0;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
  std::vector<double> initial_;
  RewardNoise noise_ = RewardNoise::bernoulli;
};

/// Deterministic (h, s) -> a map, or stochastic (h, s) -> distribution over actions.
class Policy {
 public:
  enum class Kind { deterministic, stochastic };

  Policy() = default;

  static Policy deterministic(int horizon, int num_states, int num_actions, int fill_action = 0);
  /// Uniform over actions at every (h, s).
  static Policy stochastic(int horizon, int num_states, int num_actions);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool is_deterministic() const noexcept { return kind_ == Kind::deterministic; }
  [[nodiscard]] int horizon() const noexcept { return horizon_; }
  [[nodiscard]] int num_states() const noexcept { return states_; }
  [[nodiscard]] int num_actions() const noexcept { return actions_; }

  /// Deterministic action; throws for stochastic policies.
  [[nodiscard]] int action(int h, int s) const;
  void set_action(int h, int s, int a);

  /// pi_h(a | s) for either kind.
  [[nodiscard]] double prob(int h, int s, int a) const noexcept;
  /// Mutable action distribution; stochastic policies only.
  [[nodiscard]] std::span<double> probs(int h, int s);

  /// Samples an action; consumes randomness only for stochastic policies.
  int sample(int h, int s, RandomStream& rng) const;

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  [[nodiscard]] std::size_t cell(int h, int s) const noexcept {
    return static_cast<std::size_t>(h) * states_ + s;
  }

  Kind kind_ = Kind::deterministic;
  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<int> actions_table_;
  std::vector<double> probs_table_;
};

/// V is (H + 1) x S with V[H] = 0; Q is H x S x A.
class ValueTables {
 public:
  ValueTables() = default;
  ValueTables(int horizon, int num_states, int num_actions);

  [[nodiscard]] int horizon() const noexcept { return horizon_; }
  [[nodiscard]] int num_states() const noexcept { return states_; }
  [[nodiscard]] int num_actions() const noexcept { return actions_; }

  [[nodiscard]] double v(int h, int s) const noexcept { return v_[static_cast<std::size_t>(h) * states_ + s]; }
  double& v(int h, int s) noexcept { return v_[static_cast<std::size_t>(h) * states_ + s]; }

  [[nodiscard]] double q(int h, int s, int a) const noexcept { return q_[q_offset(h, s) + a]; }
  double& q(int h, int s, int a) noexcept { return q_[q_offset(h, s) + a]; }

  [[nodiscard]] std::span<const double> q_row(int h, int s) const noexcept {
    return {q_.data() + q_offset(h, s), static_cast<std::size_t>(actions_)};
  }

 private:
  [[nodiscard]] std::size_t q_offset(int h, int s) const noexcept {
    return (static_cast<std::size_t>(h) * states_ + s) * actions_;
  }

  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<double> v_;
  std::vector<double> q_;
};

struct ValidationIssue {
  int h = -1;
  int s = -1;
  int a = -1;
  std::string message;
};

/// Every violated invariant, with coordinates. Empty means valid.
std::vector<ValidationIssue> validate_mdp(const MdpSpec& spec);
std::vector<ValidationIssue> validate_policy(const Policy& pi, int horizon, int num_states, int num_actions);

/// Throws ModelError listing all issues.
void require_valid(const MdpSpec& spec);

ValueTables evaluate_policy(const MdpSpec& spec, const Policy& pi);

struct OptimalSolution {
  ValueTables values;
  Policy policy;
};

/// Backward induction on the Bellman optimality equations; argmax ties go to the lowest action.
OptimalSolution solve_optimal(const MdpSpec& spec);

/// Lowest index among the maximal / minimal entries.
int argmax_lowest(std::span<const double> values) noexcept;
int argmin_lowest(std::span<const double> values) noexcept;

/// min over (h, s) of V^target_h(s) - min_a Q^target_h(s, a).
double minimum_gap(const MdpSpec& spec, const Policy& target);

/// True iff V^target_h(s) > min_a Q^target_h(s, a) strictly at every (h, s).
bool check_target_admissible(const MdpSpec& spec, const Policy& target);

/// argmin_a Q^target_h(s, a) at every (h, s).
Policy worst_action_policy(const MdpSpec& spec, const Policy& target);

/**
 * The environment as seen by an agent under the alpha-portion attack:
 * target-action rows are copied, every other row becomes the mixture
 * (1 - alpha) * row(target) + alpha * row(worst).
 */
MdpSpec build_alpha_attacked_mdp(const MdpSpec& spec, const Policy& target, double alpha);

struct StepOutcome {
  double reward = 0.0;
  int next_state = 0;
};

StepOutcome sample_step(const MdpSpec& spec, int h, int s, int a, RandomStream& rng);
int sample_initial_state(const MdpSpec& spec, RandomStream& rng);

}  // namespace poisonbench
