#include "macpo/env/matrix_game.hpp"

#include <stdexcept>
#include <string>

namespace macpo::matrix {

std::size_t joint_action_count(const EnvSpec& spec) {
  std::size_t total = 1;
  for (int a = 0; a < spec.n_agents; ++a) total *= static_cast<std::size_t>(spec.matrix_actions);
  return total;
}

std::size_t flat_index(const EnvSpec& spec, const JointAction& action) {
  if (action.size() != static_cast<std::size_t>(spec.n_agents))
    throw std::out_of_range("joint action length does not match agent count");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < action.size(); ++a) {
    if (action[a] < 0 || action[a] >= spec.matrix_actions)
      throw std::out_of_range("agent " + std::to_string(a) + " action index " + std::to_string(action[a]) +
                              " out of range");
    flat = flat * static_cast<std::size_t>(spec.matrix_actions) + static_cast<std::size_t>(action[a]);
  }
  return flat;
}

JointAction joint_action_at(const EnvSpec& spec, std::size_t flat) {
  JointAction u;
  u.actions.assign(static_cast<std::size_t>(spec.n_agents), 0);
  for (int a = spec.n_agents - 1; a >= 0; --a) {
    u.actions[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(spec.matrix_actions));
    flat /= static_cast<std::size_t>(spec.matrix_actions);
  }
  return u;
}

double payoff(const EnvSpec& spec, const JointAction& action) { return spec.payoff.at(flat_index(spec, action)); }

JointAction best_joint_action(const EnvSpec& spec) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < joint_action_count(spec); ++i)
    if (spec.payoff[i] > spec.payoff[best]) best = i;
  return joint_action_at(spec, best);
}

}  // namespace macpo::matrix
