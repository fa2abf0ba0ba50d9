#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "macpo/episode.hpp"
#include "macpo/nn/agent_net.hpp"
#include "macpo/rng.hpp"

namespace macpo {

/// Linear anneal from start to finish over anneal_steps, constant after.
double epsilon_at(long step, double start = 0.995, double finish = 0.05, long anneal_steps = 100000);

/// Argmax over available actions, ties to the lowest index. Throws
/// std::invalid_argument if no action is available.
int greedy_action(std::span<const double> utilities, std::span<const std::uint8_t> avail);

/// Epsilon-greedy for one agent. Always consumes one uniform draw, plus one
/// more when exploring.
int select_action(std::span<const double> utilities, std::span<const std::uint8_t> avail, double epsilon, Rng& rng);

/// Evaluates the shared agent network for every agent and picks actions.
/// last_actions entries < 0 mean "no previous action".
JointAction select_actions(const nn::AgentNet& net, const std::vector<std::vector<double>>& obs,
                           const std::vector<int>& last_actions, const std::vector<std::vector<std::uint8_t>>& avail,
                           double epsilon, Rng& rng);

}  // namespace macpo
