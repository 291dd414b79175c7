#pragma once

#include <cstdint>
#include <vector>

#include "poisonbench/mdp.hpp"

namespace poisonbench {

/// Periodic 1-d grid world parameters.
struct Grid1dParams {
  int num_states = 10;
  int num_actions = 5;
  int horizon = 10;
  double p_low = 0.5;   ///< lower bound of the action-fidelity probability
  double p_high = 1.0;  ///< upper bound of the action-fidelity probability
  std::vector<double> reward_levels{0.2, 0.35, 0.5, 0.65, 0.8};
  std::uint64_t seed = 0;
};

/// Move offsets of the 1-d grid actions: two left, one left, stay, one right, two right.
inline constexpr int kGrid1dOffsets[5] = {-2, -1, 0, 1, 2};

/**
 * Periodic 1-d grid world. For each (s, a) a fidelity p(s, a) is drawn
 * uniformly from (p_low, p_high); the agent moves by the action's offset
 * with probability p and otherwise lands uniformly on one of the five cells
 * s-2..s+2 (modulo S). Mean rewards are drawn uniformly from reward_levels.
 * Dynamics are identical at every step; the initial state is uniform.
 */
MdpSpec gen_periodic_1d(const Grid1dParams& params);

// 2-d grid world: a 4x4 board with four obstacle cells, leaving 12 states.
// Cells use 1-based [row, col] coordinates; row 1 is the top row and North
// decreases the row. States index the free cells in row-major order.
//
//   [1,1] [1,2] [1,3] [1,4]      0  1  2  3
//   [2,1]  ###   ###   ###       4
//   [3,1]  ###  [3,3] [3,4]      5     6  7
//   [4,1] [4,2] [4,3] [4,4]      8  9 10 11
//
// The chosen action is executed with probability 0.7 and each other action
// with probability 0.1. Moves off the board or into an obstacle stay put and
// pay 0. Executing South at [1,3] jumps to [3,3] paying 1. Any action at the
// terminal [4,4] returns to [1,1] paying 1. Every other move pays 0.4 when
// the destination has even row + col and 0.2 otherwise.

enum GridAction2d : int { kNorth = 0, kSouth = 1, kWest = 2, kEast = 3 };

struct GridCell {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

inline constexpr int kGrid2dStates = 12;
inline constexpr int kGrid2dActions = 4;
inline constexpr int kGrid2dHorizon = 10;

/// State index of a free cell, or -1 for obstacles and off-board cells.
int gridworld_2d_state(GridCell cell) noexcept;
GridCell gridworld_2d_cell(int state);

/// Mean reward and destination when `action` is actually executed at `cell`.
StepOutcome gridworld_2d_move(GridCell cell, int action);

MdpSpec gen_gridworld_2d();

/// Heads for [4,4] along the shortest route that never uses the [1,3] jump.
Policy gridworld_2d_target_policy();

/// Symmetric Dirichlet(1) transition rows, uniform(0,1) mean rewards, uniform initial state.
MdpSpec gen_random_mdp(int num_states, int num_actions, int horizon, std::uint64_t seed);

/**
 * Random admissible target policy: working backwards from the last step,
 * the worst action(s) under the already-fixed later steps are removed at
 * each (h, s) and the target action is drawn uniformly from the rest.
 * Throws ModelError("no admissible target found") when some (h, s) has
 * all actions tied, including A = 1.
 */
Policy gen_target_policy(const MdpSpec& spec, std::uint64_t seed);

/// S = 2, A = 2, H = 2 fixture with deterministic moves (0 = stay, 1 = switch).
MdpSpec two_state_fixture();

}  // namespace poisonbench
