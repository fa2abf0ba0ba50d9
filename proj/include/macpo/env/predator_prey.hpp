#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macpo/env/env_spec.hpp"
#include "macpo/episode.hpp"
#include "macpo/rng.hpp"

namespace macpo::pp {

enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4, kCatch = 5 };
constexpr int kNumActions = 6;
/// Removed predators may only take this action.
constexpr int kNoop = kStay;

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// std::nullopt marks a removed predator or a caught prey.
struct State {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<std::optional<Cell>> predators;
  std::vector<std::optional<Cell>> prey;
  int step_index = 0;
  bool done = false;

  friend bool operator==(const State&, const State&) = default;
};

struct StepResult {
  State next;
  double reward = 0.0;
  bool terminated = false;
  int captures = 0;
  int lone_attempts = 0;
};

/// Places all entities on distinct uniformly drawn cells.
State reset(const EnvSpec& spec, Rng& rng);

/// Moves resolve first in agent-index order (a later agent cannot enter a
/// cell taken this step), then catches, then surviving prey move. Every
/// chosen action must be available; throws std::invalid_argument otherwise.
StepResult step(const EnvSpec& spec, const State& s, const JointAction& action, Rng& rng);

std::vector<std::uint8_t> avail_actions(const State& s, int agent);

/// Two obs_size x obs_size channels (predators, prey) centred on the agent,
/// off-grid cells as -1 in both, followed by the normalized (row, col).
/// A removed predator observes all zeros.
std::vector<double> observe(const EnvSpec& spec, const State& s, int agent);
int obs_dim(const EnvSpec& spec);

/// Full-grid predator and prey occupancy channels.
std::vector<double> global_state(const State& s);
int state_dim(const EnvSpec& spec);

bool occupied(const State& s, Cell c);
int live_predators(const State& s);
int live_prey(const State& s);

/// One frame: digits for predators (index mod 10), 'o' for prey.
std::string render(const State& s);

}  // namespace macpo::pp
