#include "poisonbench/mdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace poisonbench {

namespace {

constexpr double kSumTolerance = 1e-9;

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(x);
}

std::string coords(int h, int s, int a) {
  std::ostringstream os;
  os << "[h=" << h << "][s=" << s << "]";
  if (a >= 0) os << "[a=" << a << "]";
  return os.str();
}

void check_dims(const MdpSpec& spec, const Policy& pi) {
  if (pi.horizon() != spec.horizon() || pi.num_states() != spec.num_states() ||
      pi.num_actions() != spec.num_actions()) {
    std::ostringstream os;
    os << "policy dimensions (H=" << pi.horizon() << ", S=" << pi.num_states() << ", A=" << pi.num_actions()
       << ") do not match spec (H=" << spec.horizon() << ", S=" << spec.num_states()
       << ", A=" << spec.num_actions() << ")";
    throw ModelError(os.str());
  }
}

void require_deterministic(const Policy& pi, const char* what) {
  if (!pi.is_deterministic()) throw ModelError(std::string(what) + ": target policy must be deterministic");
}

double expected_next(const MdpSpec& spec, const ValueTables& tables, int h, int s, int a) {
  const auto row = spec.transition(h, s, a);
  double acc = 0.0;
  for (int next = 0; next < spec.num_states(); ++next) {
    acc += row[next] * tables.v(h + 1, next);
  }
  return acc;
}

}  // namespace

MdpSpec::MdpSpec(int num_states, int num_actions, int horizon)
    : states_(num_states), actions_(num_actions), horizon_(horizon) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    throw ModelError("MdpSpec dimensions must be positive");
  }
  const std::size_t rows = static_cast<std::size_t>(horizon) * num_states * num_actions;
  transitions_.assign(rows * num_states, 0.0);
  rewards_.assign(rows, 0.0);
  initial_.assign(num_states, 1.0 / num_states);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) transition(h, s, a)[s] = 1.0;
}

Policy Policy::deterministic(int horizon, int num_states, int num_actions, int fill_action) {
  if (horizon < 1 || num_states < 1 || num_actions < 1) throw ModelError("Policy dimensions must be positive");
  if (fill_action < 0 || fill_action >= num_actions) throw ModelError("Policy fill action out of range");
  Policy pi;
  pi.kind_ = Kind::deterministic;
  pi.horizon_ = horizon;
  pi.states_ = num_states;
  pi.actions_ = num_actions;
  pi.actions_table_.assign(static_cast<std::size_t>(horizon) * num_states, fill_action);
  return pi;
}

Policy Policy::stochastic(int horizon, int num_states, int num_actions) {
  if (horizon < 1 || num_states < 1 || num_actions < 1) throw ModelError("Policy dimensions must be positive");
  Policy pi;
  pi.kind_ = Kind::stochastic;
  pi.horizon_ = horizon;
  pi.states_ = num_states;
  pi.actions_ = num_actions;
  pi.probs_table_.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, 1.0 / num_actions);
  return pi;
}

int Policy::action(int h, int s) const {
  if (!is_deterministic()) throw ModelError("Policy::action called on a stochastic policy");
  return actions_table_[cell(h, s)];
}

void Policy::set_action(int h, int s, int a) {
  if (!is_deterministic()) throw ModelError("Policy::set_action called on a stochastic policy");
  if (a < 0 || a >= actions_) throw ModelError("Policy::set_action: action out of range");
  actions_table_[cell(h, s)] = a;
}

double Policy::prob(int h, int s, int a) const noexcept {
  if (is_deterministic()) return actions_table_[cell(h, s)] == a ? 1.0 : 0.0;
  return probs_table_[cell(h, s) * actions_ + a];
}

std::span<double> Policy::probs(int h, int s) {
  if (is_deterministic()) throw ModelError("Policy::probs called on a deterministic policy");
  return {probs_table_.data() + cell(h, s) * actions_, static_cast<std::size_t>(actions_)};
}

int Policy::sample(int h, int s, RandomStream& rng) const {
  if (is_deterministic()) return actions_table_[cell(h, s)];
  return rng.categorical({probs_table_.data() + cell(h, s) * actions_, static_cast<std::size_t>(actions_)});
}

ValueTables::ValueTables(int horizon, int num_states, int num_actions)
    : horizon_(horizon),
      states_(num_states),
      actions_(num_actions),
      v_(static_cast<std::size_t>(horizon + 1) * num_states, 0.0),
      q_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

std::vector<ValidationIssue> validate_mdp(const MdpSpec& spec) {
  std::vector<ValidationIssue> issues;
  if (spec.num_states() < 1 || spec.num_actions() < 1 || spec.horizon() < 1) {
    issues.push_back({-1, -1, -1, "dimensions must be positive"});
    return issues;
  }
  for (int h = 0; h < spec.horizon(); ++h) {
    for (int s = 0; s < spec.num_states(); ++s) {
      for (int a = 0; a < spec.num_actions(); ++a) {
        const double r = spec.reward(h, s, a);
        if (!(r >= 0.0 && r <= 1.0)) {
          issues.push_back({h, s, a, "R" + coords(h, s, a) + ": reward out of [0,1]: " + shortest(r)});
        }
        const auto row = spec.transition(h, s, a);
        double sum = 0.0;
        bool negative = false;
        for (double p : row) {
          if (!(p >= 0.0)) negative = true;
          sum += p;
        }
        if (negative) {
          issues.push_back({h, s, a, "P" + coords(h, s, a) + ": negative or non-finite probability"});
        }
        if (!(std::abs(sum - 1.0) <= kSumTolerance)) {
          issues.push_back({h, s, a, "P" + coords(h, s, a) + ": row sum " + shortest(sum)});
        }
      }
    }
  }
  double init_sum = 0.0;
  bool init_negative = false;
  for (double p : spec.initial_dist()) {
    if (!(p >= 0.0)) init_negative = true;
    init_sum += p;
  }
  if (init_negative) issues.push_back({-1, -1, -1, "initial_dist: negative or non-finite probability"});
  if (!(std::abs(init_sum - 1.0) <= kSumTolerance)) {
    issues.push_back({-1, -1, -1, "initial_dist: sum " + shortest(init_sum)});
  }
  return issues;
}

std::vector<ValidationIssue> validate_policy(const Policy& pi, int horizon, int num_states, int num_actions) {
  std::vector<ValidationIssue> issues;
  if (pi.horizon() != horizon || pi.num_states() != num_states || pi.num_actions() != num_actions) {
    issues.push_back({-1, -1, -1, "policy dimensions do not match"});
    return issues;
  }
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      if (pi.is_deterministic()) {
        const int a = pi.action(h, s);
        if (a < 0 || a >= num_actions) issues.push_back({h, s, -1, "pi" + coords(h, s, -1) + ": action out of range"});
        continue;
      }
      double sum = 0.0;
      bool negative = false;
      for (int a = 0; a < num_actions; ++a) {
        const double p = pi.prob(h, s, a);
        if (!(p >= 0.0)) negative = true;
        sum += p;
      }
      if (negative || !(std::abs(sum - 1.0) <= kSumTolerance)) {
        issues.push_back({h, s, -1, "pi" + coords(h, s, -1) + ": not a distribution (sum " + shortest(sum) + ")"});
      }
    }
  }
  return issues;
}

void require_valid(const MdpSpec& spec) {
  const auto issues = validate_mdp(spec);
  if (issues.empty()) return;
  std::string message = "invalid MDP:";
  for (const auto& issue : issues) message += "\n  " + issue.message;
  throw ModelError(message);
}

ValueTables evaluate_policy(const MdpSpec& spec, const Policy& pi) {
  check_dims(spec, pi);
  const int H = spec.horizon();
  const int S = spec.num_states();
  const int A = spec.num_actions();
  ValueTables tables(H, S, A);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double value = 0.0;
      for (int a = 0; a < A; ++a) {
        const double q = spec.reward(h, s, a) + expected_next(spec, tables, h, s, a);
        tables.q(h, s, a) = q;
        const double weight = pi.prob(h, s, a);
        if (weight != 0.0) value += weight * q;
      }
      tables.v(h, s) = value;
    }
  }
  return tables;
}

int argmax_lowest(std::span<const double> values) noexcept {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

int argmin_lowest(std::span<const double> values) noexcept {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = static_cast<int>(i);
  }
  return best;
}

OptimalSolution solve_optimal(const MdpSpec& spec) {
  require_valid(spec);
  const int H = spec.horizon();
  const int S = spec.num_states();
  const int A = spec.num_actions();
  OptimalSolution out{ValueTables(H, S, A), Policy::deterministic(H, S, A)};
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        out.values.q(h, s, a) = spec.reward(h, s, a) + expected_next(spec, out.values, h, s, a);
      }
      const int best = argmax_lowest(out.values.q_row(h, s));
      out.policy.set_action(h, s, best);
      out.values.v(h, s) = out.values.q(h, s, best);
    }
  }
  return out;
}

double minimum_gap(const MdpSpec& spec, const Policy& target) {
  require_deterministic(target, "minimum_gap");
  const auto tables = evaluate_policy(spec, target);
  double gap = std::numeric_limits<double>::infinity();
  for (int h = 0; h < spec.horizon(); ++h) {
    for (int s = 0; s < spec.num_states(); ++s) {
      const auto row = tables.q_row(h, s);
      gap = std::min(gap, tables.v(h, s) - *std::min_element(row.begin(), row.end()));
    }
  }
  return gap;
}

bool check_target_admissible(const MdpSpec& spec, const Policy& target) {
  require_deterministic(target, "check_target_admissible");
  const auto tables = evaluate_policy(spec, target);
  for (int h = 0; h < spec.horizon(); ++h) {
    for (int s = 0; s < spec.num_states(); ++s) {
      const auto row = tables.q_row(h, s);
      if (!(tables.v(h, s) > *std::min_element(row.begin(), row.end()))) return false;
    }
  }
  return true;
}

Policy worst_action_policy(const MdpSpec& spec, const Policy& target) {
  require_deterministic(target, "worst_action_policy");
  const auto tables = evaluate_policy(spec, target);
  auto worst = Policy::deterministic(spec.horizon(), spec.num_states(), spec.num_actions());
  for (int h = 0; h < spec.horizon(); ++h) {
    for (int s = 0; s < spec.num_states(); ++s) {
      worst.set_action(h, s, argmin_lowest(tables.q_row(h, s)));
    }
  }
  return worst;
}

MdpSpec build_alpha_attacked_mdp(const MdpSpec& spec, const Policy& target, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ModelError("alpha must lie in (0, 1]");
  check_dims(spec, target);
  if (!check_target_admissible(spec, target)) throw ModelError("target policy is not admissible");
  const auto worst = worst_action_policy(spec, target);
  MdpSpec attacked = spec;
  for (int h = 0; h < spec.horizon(); ++h) {
    for (int s = 0; s < spec.num_states(); ++s) {
      const int tgt = target.action(h, s);
      const int bad = worst.action(h, s);
      const auto tgt_row = spec.transition(h, s, tgt);
      const auto bad_row = spec.transition(h, s, bad);
      for (int a = 0; a < spec.num_actions(); ++a) {
        if (a == tgt) continue;
        attacked.reward(h, s, a) = (1.0 - alpha) * spec.reward(h, s, tgt) + alpha * spec.reward(h, s, bad);
        auto row = attacked.transition(h, s, a);
        for (int next = 0; next < spec.num_states(); ++next) {
          row[next] = (1.0 - alpha) * tgt_row[next] + alpha * bad_row[next];
        }
      }
    }
  }
  return attacked;
}

StepOutcome sample_step(const MdpSpec& spec, int h, int s, int a, RandomStream& rng) {
  if (!spec.contains(h, s, a)) throw std::out_of_range("sample_step: index out of range");
  const double mean = spec.reward(h, s, a);
  StepOutcome out;
  if (spec.reward_noise() == RewardNoise::bernoulli) {
    out.reward = rng.bernoulli(mean) ? 1.0 : 0.0;
  } else {
    out.reward = mean;
  }
  out.next_state = rng.categorical(spec.transition(h, s, a));
  return out;
}

int sample_initial_state(const MdpSpec& spec, RandomStream& rng) {
  return rng.categorical(spec.initial_dist());
}

}  // namespace poisonbench
