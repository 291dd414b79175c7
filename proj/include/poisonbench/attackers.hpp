#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "poisonbench/mdp.hpp"
#include "poisonbench/random.hpp"

namespace poisonbench {

/// Executed action and the importance weight the attacker assigns to it.
struct Interception {
  int action = 0;
  double weight = 1.0;
};

/**
 * Middleware between agent and environment. `intercept` sees the agent's
 * choice and returns the action the environment will execute; `observe`
 * and `end_episode` feed whatever the attacker learns from.
 */
class Attacker {
 public:
  virtual ~Attacker() = default;

  virtual Interception intercept(int h, int s, int a, RandomStream& rng) = 0;
  virtual void observe(int /*h*/, int /*s*/, int /*agent_action*/, const Interception& /*executed*/,
                       double /*reward*/, int /*next_state*/) {}
  virtual void end_episode() {}

  /// True when target-policy actions are never altered (so Cost <= Loss).
  [[nodiscard]] virtual bool spares_target() const noexcept = 0;
  [[nodiscard]] virtual std::string_view name() const noexcept = 0;
};

// Stateless rules.

inline int attack_none(int /*h*/, int /*s*/, int a) noexcept { return a; }

/// Swap the optimal and the target action; leave everything else alone.
int attack_exchange(const Policy& optimal, const Policy& target, int h, int s, int a);

/// Non-target a -> target w.p. 1 - alpha, worst w.p. alpha. Target a passes untouched without drawing.
int attack_alpha_portion(const Policy& target, const Policy& worst, double alpha, int h, int s, int a,
                         RandomStream& rng);

class NoAttack final : public Attacker {
 public:
  Interception intercept(int h, int s, int a, RandomStream&) override { return {attack_none(h, s, a), 1.0}; }
  [[nodiscard]] bool spares_target() const noexcept override { return true; }
  [[nodiscard]] std::string_view name() const noexcept override { return "none"; }
};

class ExchangeAttack final : public Attacker {
 public:
  ExchangeAttack(Policy optimal, Policy target);

  Interception intercept(int h, int s, int a, RandomStream&) override {
    return {attack_exchange(optimal_, target_, h, s, a), 1.0};
  }
  [[nodiscard]] bool spares_target() const noexcept override { return false; }
  [[nodiscard]] std::string_view name() const noexcept override { return "exchange"; }

 private:
  Policy optimal_;
  Policy target_;
};

class AlphaPortionAttack final : public Attacker {
 public:
  /// `worst` is normally worst_action_policy(spec, target).
  AlphaPortionAttack(Policy target, Policy worst, double alpha);

  Interception intercept(int h, int s, int a, RandomStream& rng) override {
    return {attack_alpha_portion(target_, worst_, alpha_, h, s, a, rng), 1.0};
  }
  [[nodiscard]] bool spares_target() const noexcept override { return true; }
  [[nodiscard]] std::string_view name() const noexcept override { return "alpha_portion"; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

 private:
  Policy target_;
  Policy worst_;
  double alpha_;
};

/// Per-step record of one episode as seen by the attacker.
struct EpisodeTape {
  struct Step {
    int state = 0;
    int agent_action = 0;
    int executed_action = 0;
    double weight = 1.0;
    double reward = 0.0;
  };
  std::vector<Step> steps;
};

/// Hoeffding width (e (H - h) + 1) sqrt(2 iota / t), written with 1-based steps;
/// here `h` is 0-based, so the factor is e (H - 1 - h) + 1.
double lcb_width(int h, int horizon, std::int64_t t, double iota);

/**
 * Black-box attacker state: visit counts of executed (h, s, a), running
 * importance-sampled estimates of the target policy's Q-values, and their
 * lower confidence bounds (-inf until first visit).
 */
class LcbhState {
 public:
  LcbhState(Policy target, Dims dims, std::int64_t total_steps, double p);

  /// No attack on target actions (w = 1). Otherwise with probability 1/H the
  /// lowest-LCB non-target action (w = 0), else the target action (w = H / (H - 1)).
  Interception intercept(int h, int s, int a, RandomStream& rng) const;

  /// Backward IS update over a complete tape of H steps. With update_bounds
  /// false the lower bounds are left as they are.
  void end_episode(const EpisodeTape& tape, bool update_bounds = true);

  [[nodiscard]] int worst_candidate(int h, int s) const noexcept;

  [[nodiscard]] Dims dims() const noexcept { return dims_; }
  [[nodiscard]] const Policy& target() const noexcept { return target_; }
  [[nodiscard]] double iota() const noexcept { return iota_; }
  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] std::int64_t visits(int h, int s, int a) const noexcept { return n_[index(h, s, a)]; }
  [[nodiscard]] double q_hat(int h, int s, int a) const noexcept { return q_hat_[index(h, s, a)]; }
  [[nodiscard]] double lower_bound(int h, int s, int a) const noexcept { return lower_[index(h, s, a)]; }
  [[nodiscard]] double width(int h, std::int64_t t) const { return lcb_width(h, dims_.horizon, t, iota_); }

  /// Overwrite the lower-bound table (used to freeze the intercept rule).
  void set_lower_bound(int h, int s, int a, double value) noexcept { lower_[index(h, s, a)] = value; }

 private:
  [[nodiscard]] std::size_t index(int h, int s, int a) const noexcept {
    return (static_cast<std::size_t>(h) * dims_.num_states + s) * dims_.num_actions + a;
  }

  Policy target_;
  Dims dims_;
  double p_;
  double iota_;
  std::vector<std::int64_t> n_;
  std::vector<double> q_hat_;
  std::vector<double> lower_;
};

class LcbhAttack final : public Attacker {
 public:
  LcbhAttack(Policy target, Dims dims, std::int64_t total_steps, double p);

  Interception intercept(int h, int s, int a, RandomStream& rng) override { return state_.intercept(h, s, a, rng); }
  void observe(int h, int s, int agent_action, const Interception& executed, double reward, int next_state) override;
  void end_episode() override;

  [[nodiscard]] bool spares_target() const noexcept override { return true; }
  [[nodiscard]] std::string_view name() const noexcept override { return "lcbh"; }

  [[nodiscard]] const LcbhState& state() const noexcept { return state_; }
  [[nodiscard]] LcbhState& state() noexcept { return state_; }
  /// When frozen, tapes are still recorded and estimates still updated, but
  /// the lower bounds used by intercept() stay as they were.
  void set_frozen(bool frozen) noexcept { frozen_ = frozen; }

 private:
  LcbhState state_;
  EpisodeTape tape_;
  bool frozen_ = false;
};

}  // namespace poisonbench
