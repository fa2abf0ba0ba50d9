#pragma once

#include <cstddef>

#include "macpo/env/env_spec.hpp"
#include "macpo/episode.hpp"

namespace macpo::matrix {

/// Row-major payoff lookup. Throws std::out_of_range on a bad index.
double payoff(const EnvSpec& spec, const JointAction& action);

/// Flat index of a joint action in the payoff tensor.
std::size_t flat_index(const EnvSpec& spec, const JointAction& action);
JointAction joint_action_at(const EnvSpec& spec, std::size_t flat);
std::size_t joint_action_count(const EnvSpec& spec);

/// Exhaustive argmax; ties go to the lowest flat index.
JointAction best_joint_action(const EnvSpec& spec);

}  // namespace macpo::matrix
