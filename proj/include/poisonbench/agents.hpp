#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "poisonbench/mdp.hpp"
#include "poisonbench/random.hpp"

namespace poisonbench {

/**
 * Learner interface. The agent only ever sees its own chosen action and the
 * (reward, next state) that followed; it has no view of any attacker.
 */
class Agent {
 public:
  virtual ~Agent() = default;

  virtual int choose(int h, int s, RandomStream& rng) = 0;
  virtual void observe(int h, int s, int a, double reward, int next_state) = 0;
  [[nodiscard]] virtual std::string_view name() const noexcept = 0;
};

enum class QInit { optimistic, zero };

struct UcbConfig {
  double c = 2.0;          ///< Hoeffding bonus constant
  double p = 0.05;         ///< failure probability inside iota
  QInit q_init = QInit::optimistic;
  double c_bernstein = 2.0;  ///< variance-term constant of the Bernstein variant
};

/// log(2 S A T / p)
double log_term(Dims dims, std::int64_t total_steps, double p);

/**
 * Tables of the UCB-Hoeffding Q-learner: optimistic Q, visit counts N and
 * clipped values V (with V[H] = 0), plus the constants of the bonus.
 */
class UcbhState {
 public:
  UcbhState(Dims dims, std::int64_t total_steps, const UcbConfig& config);

  [[nodiscard]] Dims dims() const noexcept { return dims_; }
  [[nodiscard]] double q(int h, int s, int a) const noexcept { return q_[index(h, s, a)]; }
  [[nodiscard]] std::int64_t visits(int h, int s, int a) const noexcept { return n_[index(h, s, a)]; }
  [[nodiscard]] double v(int h, int s) const noexcept {
    return v_[static_cast<std::size_t>(h) * dims_.num_states + s];
  }
  [[nodiscard]] std::span<const double> q_row(int h, int s) const noexcept {
    return {q_.data() + index(h, s, 0), static_cast<std::size_t>(dims_.num_actions)};
  }
  [[nodiscard]] double iota() const noexcept { return iota_; }
  [[nodiscard]] const UcbConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::int64_t total_steps() const noexcept { return total_steps_; }

  /// Learning rate (H + 1) / (H + t).
  [[nodiscard]] double learning_rate(std::int64_t t) const noexcept;
  /// c * sqrt(H^3 iota / t).
  [[nodiscard]] double hoeffding_bonus(std::int64_t t) const noexcept;

  /// argmax_a Q[h][s][a], lowest index on ties.
  [[nodiscard]] int greedy_action(int h, int s) const noexcept { return argmax_lowest(q_row(h, s)); }

  /**
   * Q[h][s][a] <- (1 - alpha_t) Q + alpha_t (r + V[h+1](s') + bonus), then
   * V[h][s] <- min(H, max_a Q[h][s][a]). `bonus` must be computed for
   * t = visits(h, s, a) + 1, the count after this visit.
   */
  void update(int h, int s, int a, double reward, int next_state, double bonus) noexcept;

 private:
  friend class UcbhAgent;
  friend class UcbbAgent;

  [[nodiscard]] std::size_t index(int h, int s, int a) const noexcept {
    return (static_cast<std::size_t>(h) * dims_.num_states + s) * dims_.num_actions + a;
  }
  void refresh_value(int h, int s) noexcept;

  Dims dims_;
  UcbConfig config_;
  std::int64_t total_steps_;
  double iota_;
  std::vector<double> q_;
  std::vector<std::int64_t> n_;
  std::vector<double> v_;
};

/// Q-learning with UCB-Hoeffding exploration.
class UcbhAgent final : public Agent {
 public:
  UcbhAgent(Dims dims, std::int64_t total_steps, const UcbConfig& config = {});

  int choose(int h, int s, RandomStream& rng) override;
  void observe(int h, int s, int a, double reward, int next_state) override;
  [[nodiscard]] std::string_view name() const noexcept override { return "ucbh"; }

  [[nodiscard]] const UcbhState& state() const noexcept { return state_; }

 private:
  UcbhState state_;
};

/**
 * Q-learning with UCB-Bernstein exploration. The bonus follows the
 * Bernstein variant of optimistic Q-learning:
 *   beta_t = min{ c1 (sqrt(H/t (W_t + H) iota) + sqrt(H^7 S A) iota / t), c2 sqrt(H^3 iota / t) }
 *   b_t    = (beta_t - (1 - alpha_t) beta_{t-1}) / (2 alpha_t)
 * where W_t is the empirical variance of the observed V[h+1](s') values,
 * c1 = config.c_bernstein and c2 = config.c. The bonus is floored at zero.
 */
class UcbbAgent final : public Agent {
 public:
  UcbbAgent(Dims dims, std::int64_t total_steps, const UcbConfig& config = {});

  int choose(int h, int s, RandomStream& rng) override;
  void observe(int h, int s, int a, double reward, int next_state) override;
  [[nodiscard]] std::string_view name() const noexcept override { return "ucbb"; }

  [[nodiscard]] const UcbhState& state() const noexcept { return state_; }

  /// beta_t for a given empirical variance.
  [[nodiscard]] double beta(std::int64_t t, double variance) const noexcept;
  /// Bonus actually added at visit t given beta_t and beta_{t-1}.
  [[nodiscard]] double bonus(std::int64_t t, double beta_t, double beta_prev) const noexcept;

 private:
  UcbhState state_;
  std::vector<double> value_sum_;
  std::vector<double> value_sq_sum_;
  std::vector<double> beta_prev_;
};

/// Plays a fixed (deterministic or stochastic) policy and never learns.
class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(Policy policy) : policy_(std::move(policy)) {}

  int choose(int h, int s, RandomStream& rng) override { return policy_.sample(h, s, rng); }
  void observe(int, int, int, double, int) override {}
  [[nodiscard]] std::string_view name() const noexcept override { return "policy"; }

  [[nodiscard]] const Policy& policy() const noexcept { return policy_; }

 private:
  Policy policy_;
};

}  // namespace poisonbench
