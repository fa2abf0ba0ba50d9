#pragma once

#include <string>
#include <vector>

namespace macpo {

enum class EnvVariant { predator_prey, matrix_game };

std::string to_string(EnvVariant v);
EnvVariant env_variant_from_string(const std::string& s);

/// Environment description as carried in a run configuration. Fields not
/// used by the selected variant are ignored.
struct EnvSpec {
  EnvVariant variant = EnvVariant::predator_prey;

  // predator-prey
  int grid_w = 7;
  int grid_h = 7;
  int n_agents = 4;
  int n_prey = 2;
  double punishment = 0.0;
  double capture_reward = 10.0;
  int obs_size = 5;
  int episode_limit = 100;

  // matrix game: per-agent action count and a row-major payoff tensor of
  // size matrix_actions^n_agents
  int matrix_actions = 3;
  std::vector<double> payoff;

  /// Throws std::invalid_argument when the spec is unusable.
  void validate() const;

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

/// 7x7 grid, 4 predators, 2 prey, 100-step limit.
EnvSpec scaled_predator_prey(double punishment);
/// 10x10 grid, 8 predators, 8 prey, 200-step limit.
EnvSpec full_predator_prey(double punishment);
/// Two agents, three actions, a single optimum at (0,0) that a monotonic
/// factorization cannot represent alongside the -12 penalties.
EnvSpec hostile_matrix_game();
/// Two agents, two actions, payoff [[1, 0], [0, 0.5]].
EnvSpec cooperative_matrix_game();

}  // namespace macpo
