#include "poisonbench/attackers.hpp"

#include <cmath>
#include <numbers>

#include "poisonbench/agents.hpp"

namespace poisonbench {

int attack_exchange(const Policy& optimal, const Policy& target, int h, int s, int a) {
  const int best = optimal.action(h, s);
  const int tgt = target.action(h, s);
  if (a == best) return tgt;
  if (a == tgt) return best;
  return a;
}

int attack_alpha_portion(const Policy& target, const Policy& worst, double alpha, int h, int s, int a,
                         RandomStream& rng) {
  const int tgt = target.action(h, s);
  if (a == tgt) return a;
  return rng.uniform() < alpha ? worst.action(h, s) : tgt;
}

ExchangeAttack::ExchangeAttack(Policy optimal, Policy target) : optimal_(std::move(optimal)), target_(std::move(target)) {
  if (!optimal_.is_deterministic() || !target_.is_deterministic()) {
    throw ModelError("exchange attack needs deterministic optimal and target policies");
  }
}

AlphaPortionAttack::AlphaPortionAttack(Policy target, Policy worst, double alpha)
    : target_(std::move(target)), worst_(std::move(worst)), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ModelError("alpha must lie in (0, 1]");
  if (!target_.is_deterministic() || !worst_.is_deterministic()) {
    throw ModelError("alpha-portion attack needs deterministic target and worst-action policies");
  }
}

double lcb_width(int h, int horizon, std::int64_t t, double iota) {
  if (t < 1) throw std::invalid_argument("lcb_width: t must be at least 1");
  const double steps_left = static_cast<double>(horizon - 1 - h);
  return (std::numbers::e * steps_left + 1.0) * std::sqrt(2.0 * iota / static_cast<double>(t));
}

LcbhState::LcbhState(Policy target, Dims dims, std::int64_t total_steps, double p)
    : target_(std::move(target)), dims_(dims), p_(p) {
  if (dims.horizon < 2) throw ModelError("LCB-H needs H >= 2 (the target weight H / (H - 1) is undefined at H = 1)");
  if (!target_.is_deterministic()) throw ModelError("LCB-H target policy must be deterministic");
  if (target_.horizon() != dims.horizon || target_.num_states() != dims.num_states ||
      target_.num_actions() != dims.num_actions) {
    throw ModelError("LCB-H target policy dimensions do not match");
  }
  if (!(p > 0.0 && p < 1.0)) throw ModelError("failure probability p must lie in (0, 1)");
  if (total_steps < 1) throw ModelError("planned total steps T must be positive");
  iota_ = log_term(dims, total_steps, p);
  const std::size_t cells = static_cast<std::size_t>(dims.horizon) * dims.num_states * dims.num_actions;
  n_.assign(cells, 0);
  q_hat_.assign(cells, 0.0);
  lower_.assign(cells, -std::numeric_limits<double>::infinity());
}

int LcbhState::worst_candidate(int h, int s) const noexcept {
  const int tgt = target_.action(h, s);
  int best = -1;
  for (int a = 0; a < dims_.num_actions; ++a) {
    if (a == tgt) continue;
    if (best < 0 || lower_bound(h, s, a) < lower_bound(h, s, best)) best = a;
  }
  return best < 0 ? tgt : best;
}

Interception LcbhState::intercept(int h, int s, int a, RandomStream& rng) const {
  const int tgt = target_.action(h, s);
  if (a == tgt) return {a, 1.0};
  const double H = dims_.horizon;
  if (rng.uniform() < 1.0 / H) return {worst_candidate(h, s), 0.0};
  return {tgt, H / (H - 1.0)};
}

void LcbhState::end_episode(const EpisodeTape& tape, bool update_bounds) {
  if (static_cast<int>(tape.steps.size()) != dims_.horizon) {
    throw std::invalid_argument("LCB-H end_episode: incomplete tape");
  }
  double future_return = 0.0;  // G_{h+1}
  double future_ratio = 1.0;   // rho_{h+1:H+1}
  for (int h = dims_.horizon - 1; h >= 0; --h) {
    const auto& step = tape.steps[h];
    const std::size_t i = index(h, step.state, step.executed_action);
    const std::int64_t t = ++n_[i];
    const double inv_t = 1.0 / static_cast<double>(t);
    const double sample = step.reward + future_return * future_ratio;
    q_hat_[i] = (1.0 - inv_t) * q_hat_[i] + inv_t * sample;
    if (update_bounds) lower_[i] = q_hat_[i] - width(h, t);
    future_return += step.reward;
    future_ratio *= step.weight;
  }
}

LcbhAttack::LcbhAttack(Policy target, Dims dims, std::int64_t total_steps, double p)
    : state_(std::move(target), dims, total_steps, p) {
  tape_.steps.reserve(dims.horizon);
}

void LcbhAttack::observe(int /*h*/, int s, int agent_action, const Interception& executed, double reward,
                         int /*next_state*/) {
  tape_.steps.push_back({s, agent_action, executed.action, executed.weight, reward});
}

void LcbhAttack::end_episode() {
  state_.end_episode(tape_, !frozen_);
  tape_.steps.clear();
}

}  // namespace poisonbench
