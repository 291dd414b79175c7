#include "poisonbench/agents.hpp"

#include <algorithm>
#include <cmath>

namespace poisonbench {

namespace {

void check_config(Dims dims, std::int64_t total_steps, const UcbConfig& config) {
  if (dims.num_states < 1 || dims.num_actions < 1 || dims.horizon < 1) {
    throw ModelError("agent dimensions must be positive");
  }
  if (!(config.c > 0.0)) throw ModelError("bonus constant c must be positive");
  if (!(config.c_bernstein > 0.0)) throw ModelError("Bernstein constant must be positive");
  if (!(config.p > 0.0 && config.p < 1.0)) throw ModelError("failure probability p must lie in (0, 1)");
  if (total_steps < 1) throw ModelError("planned total steps T must be positive");
}

}  // namespace

double log_term(Dims dims, std::int64_t total_steps, double p) {
  return std::log(2.0 * dims.num_states * dims.num_actions * static_cast<double>(total_steps) / p);
}

UcbhState::UcbhState(Dims dims, std::int64_t total_steps, const UcbConfig& config)
    : dims_(dims), config_(config), total_steps_(total_steps) {
  check_config(dims, total_steps, config);
  iota_ = log_term(dims, total_steps, config.p);
  const double H = dims.horizon;
  const double q0 = config.q_init == QInit::optimistic ? H : 0.0;
  const std::size_t cells = static_cast<std::size_t>(dims.horizon) * dims.num_states * dims.num_actions;
  q_.assign(cells, q0);
  n_.assign(cells, 0);
  v_.assign(static_cast<std::size_t>(dims.horizon + 1) * dims.num_states, std::min(H, q0));
  std::fill(v_.end() - dims.num_states, v_.end(), 0.0);
}

double UcbhState::learning_rate(std::int64_t t) const noexcept {
  const double H = dims_.horizon;
  return (H + 1.0) / (H + static_cast<double>(t));
}

double UcbhState::hoeffding_bonus(std::int64_t t) const noexcept {
  const double H = dims_.horizon;
  return config_.c * std::sqrt(H * H * H * iota_ / static_cast<double>(t));
}

void UcbhState::update(int h, int s, int a, double reward, int next_state, double bonus) noexcept {
  const std::size_t i = index(h, s, a);
  const std::int64_t t = ++n_[i];
  const double lr = learning_rate(t);
  const double target = reward + v(h + 1, next_state) + bonus;
  q_[i] = (1.0 - lr) * q_[i] + lr * target;
  refresh_value(h, s);
}

void UcbhState::refresh_value(int h, int s) noexcept {
  const auto row = q_row(h, s);
  const double best = *std::max_element(row.begin(), row.end());
  v_[static_cast<std::size_t>(h) * dims_.num_states + s] = std::min(static_cast<double>(dims_.horizon), best);
}

UcbhAgent::UcbhAgent(Dims dims, std::int64_t total_steps, const UcbConfig& config)
    : state_(dims, total_steps, config) {}

int UcbhAgent::choose(int h, int s, RandomStream&) { return state_.greedy_action(h, s); }

void UcbhAgent::observe(int h, int s, int a, double reward, int next_state) {
  const std::int64_t t = state_.visits(h, s, a) + 1;
  state_.update(h, s, a, reward, next_state, state_.hoeffding_bonus(t));
}

UcbbAgent::UcbbAgent(Dims dims, std::int64_t total_steps, const UcbConfig& config)
    : state_(dims, total_steps, config) {
  const std::size_t cells = static_cast<std::size_t>(dims.horizon) * dims.num_states * dims.num_actions;
  value_sum_.assign(cells, 0.0);
  value_sq_sum_.assign(cells, 0.0);
  beta_prev_.assign(cells, 0.0);
}

int UcbbAgent::choose(int h, int s, RandomStream&) { return state_.greedy_action(h, s); }

double UcbbAgent::beta(std::int64_t t, double variance) const noexcept {
  const Dims d = state_.dims();
  const double H = d.horizon;
  const double iota = state_.iota();
  const double tt = static_cast<double>(t);
  const double bernstein =
      state_.config().c_bernstein *
      (std::sqrt(H / tt * (variance + H) * iota) + std::sqrt(std::pow(H, 7) * d.num_states * d.num_actions) * iota / tt);
  return std::min(bernstein, state_.hoeffding_bonus(t));
}

double UcbbAgent::bonus(std::int64_t t, double beta_t, double beta_prev) const noexcept {
  const double lr = state_.learning_rate(t);
  return std::max(0.0, (beta_t - (1.0 - lr) * beta_prev) / (2.0 * lr));
}

void UcbbAgent::observe(int h, int s, int a, double reward, int next_state) {
  const std::size_t i = state_.index(h, s, a);
  const double next_value = state_.v(h + 1, next_state);
  value_sum_[i] += next_value;
  value_sq_sum_[i] += next_value * next_value;
  const std::int64_t t = state_.visits(h, s, a) + 1;
  const double tt = static_cast<double>(t);
  const double mean = value_sum_[i] / tt;
  const double variance = std::max(0.0, value_sq_sum_[i] / tt - mean * mean);
  const double beta_t = beta(t, variance);
  const double b = bonus(t, beta_t, beta_prev_[i]);
  beta_prev_[i] = beta_t;
  state_.update(h, s, a, reward, next_state, b);
}

}  // namespace poisonbench
