#pragma once

#include <cstdint>
#include <vector>

#include "macpo/episode.hpp"
#include "macpo/nn/agent_net.hpp"

namespace macpo {

/// Time-major tensors for a sampled batch, truncated to the longest
/// episode. Sample s = b * time + t; agent column = s * n_agents + a.
struct EpisodeBatch {
  int batch = 0;
  int time = 0;
  int n_agents = 0;
  int n_actions = 0;
  int state_dim = 0;

  nn::Matrix states;        // state_dim x samples
  nn::Matrix agent_inputs;  // agent input_dim x (samples * n_agents)
  std::vector<std::uint8_t> avail;  // (samples * n_agents) x n_actions, row-major
  std::vector<int> actions;         // samples * n_agents
  std::vector<double> rewards;      // samples
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> mask;

  int samples() const { return batch * time; }
  std::size_t filled_count() const;

  /// Padding gets zero payload, action 0 and every action marked available.
  static EpisodeBatch from_episodes(const std::vector<const Episode*>& episodes, const nn::AgentNet& net);
};

}  // namespace macpo
