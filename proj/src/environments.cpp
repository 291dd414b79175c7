#include "poisonbench/environments.hpp"

#include <algorithm>
#include <array>

namespace poisonbench {

namespace {

int wrap(int x, int n) { return ((x % n) + n) % n; }

constexpr std::array<GridCell, 4> kObstacles{{{2, 2}, {2, 3}, {2, 4}, {3, 2}}};
constexpr GridCell kStart{1, 1};
constexpr GridCell kTerminal{4, 4};
constexpr GridCell kJumpFrom{1, 3};
constexpr GridCell kJumpTo{3, 3};

bool is_obstacle(GridCell c) {
  return std::find(kObstacles.begin(), kObstacles.end(), c) != kObstacles.end();
}

bool on_board(GridCell c) { return c.row >= 1 && c.row <= 4 && c.col >= 1 && c.col <= 4; }

}  // namespace

MdpSpec gen_periodic_1d(const Grid1dParams& params) {
  if (params.num_actions != 5) throw ModelError("gen_periodic_1d: num_actions must be 5");
  if (params.num_states < 1 || params.horizon < 1) throw ModelError("gen_periodic_1d: dimensions must be positive");
  if (!(params.p_low > 0.0 && params.p_low < params.p_high && params.p_high <= 1.0)) {
    throw ModelError("gen_periodic_1d: need 0 < p_low < p_high <= 1");
  }
  if (params.reward_levels.empty()) throw ModelError("gen_periodic_1d: reward_levels is empty");
  for (double r : params.reward_levels) {
    if (!(r >= 0.0 && r <= 1.0)) throw ModelError("gen_periodic_1d: reward level outside [0,1]");
  }

  const int S = params.num_states;
  const int A = 5;
  RandomStream rng = RandomStream(params.seed).split("grid1d");

  std::vector<double> fidelity(static_cast<std::size_t>(S) * A);
  std::vector<double> mean_reward(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const std::size_t i = static_cast<std::size_t>(s) * A + a;
      fidelity[i] = params.p_low + (params.p_high - params.p_low) * rng.uniform_open();
      mean_reward[i] = params.reward_levels[rng.uniform_int(params.reward_levels.size())];
    }
  }

  MdpSpec spec(S, A, params.horizon);
  for (int h = 0; h < params.horizon; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        const double p = fidelity[i];
        auto row = spec.transition(h, s, a);
        std::fill(row.begin(), row.end(), 0.0);
        row[wrap(s + kGrid1dOffsets[a], S)] += p;
        for (int offset = -2; offset <= 2; ++offset) row[wrap(s + offset, S)] += (1.0 - p) / 5.0;
        spec.reward(h, s, a) = mean_reward[i];
      }
    }
  }
  return spec;
}

int gridworld_2d_state(GridCell cell) noexcept {
  if (!on_board(cell) || is_obstacle(cell)) return -1;
  int index = 0;
  for (int row = 1; row <= 4; ++row) {
    for (int col = 1; col <= 4; ++col) {
      const GridCell c{row, col};
      if (is_obstacle(c)) continue;
      if (c == cell) return index;
      ++index;
    }
  }
  return -1;
}

GridCell gridworld_2d_cell(int state) {
  int index = 0;
  for (int row = 1; row <= 4; ++row) {
    for (int col = 1; col <= 4; ++col) {
      const GridCell c{row, col};
      if (is_obstacle(c)) continue;
      if (index == state) return c;
      ++index;
    }
  }
  throw std::out_of_range("gridworld_2d_cell: state out of range");
}

StepOutcome gridworld_2d_move(GridCell cell, int action) {
  if (cell == kTerminal) return {1.0, gridworld_2d_state(kStart)};
  if (cell == kJumpFrom && action == kSouth) return {1.0, gridworld_2d_state(kJumpTo)};
  GridCell dest = cell;
  switch (action) {
    case kNorth: dest.row -= 1; break;
    case kSouth: dest.row += 1; break;
    case kWest: dest.col -= 1; break;
    case kEast: dest.col += 1; break;
    default: throw std::out_of_range("gridworld_2d_move: bad action");
  }
  if (!on_board(dest) || is_obstacle(dest)) return {0.0, gridworld_2d_state(cell)};
  const double reward = (dest.row + dest.col) % 2 == 0 ? 0.4 : 0.2;
  return {reward, gridworld_2d_state(dest)};
}

MdpSpec gen_gridworld_2d() {
  constexpr double kFollow = 0.7;
  constexpr double kSlip = 0.1;
  MdpSpec spec(kGrid2dStates, kGrid2dActions, kGrid2dHorizon);
  for (int s = 0; s < kGrid2dStates; ++s) {
    const GridCell cell = gridworld_2d_cell(s);
    for (int chosen = 0; chosen < kGrid2dActions; ++chosen) {
      double mean = 0.0;
      std::array<double, kGrid2dStates> row{};
      for (int executed = 0; executed < kGrid2dActions; ++executed) {
        const double w = executed == chosen ? kFollow : kSlip;
        const auto move = gridworld_2d_move(cell, executed);
        mean += w * move.reward;
        row[move.next_state] += w;
      }
      for (int h = 0; h < kGrid2dHorizon; ++h) {
        spec.reward(h, s, chosen) = mean;
        std::copy(row.begin(), row.end(), spec.transition(h, s, chosen).begin());
      }
    }
  }
  auto init = spec.initial_dist();
  std::fill(init.begin(), init.end(), 0.0);
  init[gridworld_2d_state(kStart)] = 1.0;
  return spec;
}

Policy gridworld_2d_target_policy() {
  auto pi = Policy::deterministic(kGrid2dHorizon, kGrid2dStates, kGrid2dActions);
  const auto at = [](int row, int col) { return gridworld_2d_state({row, col}); };
  const std::array<std::pair<int, int>, kGrid2dStates> route{{
      {at(1, 1), kSouth}, {at(1, 2), kWest}, {at(1, 3), kWest}, {at(1, 4), kWest},
      {at(2, 1), kSouth}, {at(3, 1), kSouth}, {at(3, 3), kSouth}, {at(3, 4), kSouth},
      {at(4, 1), kEast},  {at(4, 2), kEast},  {at(4, 3), kEast},  {at(4, 4), kNorth},
  }};
  for (int h = 0; h < kGrid2dHorizon; ++h) {
    for (auto [state, action] : route) pi.set_action(h, state, action);
  }
  return pi;
}

MdpSpec gen_random_mdp(int num_states, int num_actions, int horizon, std::uint64_t seed) {
  MdpSpec spec(num_states, num_actions, horizon);
  RandomStream rng = RandomStream(seed).split("random_mdp");
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        auto row = spec.transition(h, s, a);
        double total = 0.0;
        for (auto& p : row) {
          p = rng.exponential();
          total += p;
        }
        for (auto& p : row) p /= total;
        spec.reward(h, s, a) = rng.uniform();
      }
    }
  }
  return spec;
}

Policy gen_target_policy(const MdpSpec& spec, std::uint64_t seed) {
  require_valid(spec);
  const int H = spec.horizon();
  const int S = spec.num_states();
  const int A = spec.num_actions();
  if (A < 2) throw ModelError("no admissible target found: a single action is always the worst");

  RandomStream rng = RandomStream(seed).split("target_policy");
  auto target = Policy::deterministic(H, S, A);
  std::vector<double> next_value(S, 0.0);
  std::vector<double> value(S, 0.0);
  std::vector<double> q(A);
  std::vector<int> candidates;
  candidates.reserve(A);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const auto row = spec.transition(h, s, a);
        double acc = 0.0;
        for (int next = 0; next < S; ++next) acc += row[next] * next_value[next];
        q[a] = spec.reward(h, s, a) + acc;
      }
      const double worst = *std::min_element(q.begin(), q.end());
      candidates.clear();
      for (int a = 0; a < A; ++a) {
        if (q[a] > worst) candidates.push_back(a);
      }
      if (candidates.empty()) throw ModelError("no admissible target found: all actions tied at some (h, s)");
      const int chosen = candidates[rng.uniform_int(candidates.size())];
      target.set_action(h, s, chosen);
      value[s] = q[chosen];
    }
    next_value.swap(value);
  }
  if (!check_target_admissible(spec, target)) throw ModelError("no admissible target found");
  return target;
}

MdpSpec two_state_fixture() {
  MdpSpec spec(2, 2, 2);
  // R[h][s][a]
  constexpr double rewards[2][2][2] = {{{0.2, 0.5}, {0.9, 0.1}}, {{0.3, 0.6}, {0.8, 0.4}}};
  for (int h = 0; h < 2; ++h) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        auto row = spec.transition(h, s, a);
        std::fill(row.begin(), row.end(), 0.0);
        row[a == 0 ? s : 1 - s] = 1.0;
        spec.reward(h, s, a) = rewards[h][s][a];
      }
    }
  }
  return spec;
}

}  // namespace poisonbench
