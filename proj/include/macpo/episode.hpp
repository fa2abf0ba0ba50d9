#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace macpo {

/// One discrete action index per agent.
struct JointAction {
  std::vector<int> actions;

  std::size_t size() const { return actions.size(); }
  int operator[](std::size_t i) const { return actions[i]; }
  int& operator[](std::size_t i) { return actions[i]; }
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

/// A single environment timestep as handed out by the environments.
struct Transition {
  std::vector<double> state;
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<std::uint8_t>> avail;
  JointAction action;
  double reward = 0.0;
  bool terminated = false;
  bool filled = true;
};

struct EpisodeShape {
  int n_agents = 0;
  int n_actions = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int episode_limit = 0;

  friend bool operator==(const EpisodeShape&, const EpisodeShape&) = default;
};

/// A trajectory stored as flat arrays. Only `length()` steps are held in
/// memory; indices in [length, episode_limit) read back as padding
/// (filled == false, zero payload).
class Episode {
 public:
  Episode() = default;
  explicit Episode(EpisodeShape shape);

  /// Appends a step. Throws std::invalid_argument on any dimension mismatch,
  /// an unavailable action, a nonfinite reward, or a step after termination.
  void push(const Transition& step);

  const EpisodeShape& shape() const { return shape_; }
  int length() const { return length_; }
  int padded_length() const { return shape_.episode_limit; }
  bool filled(int t) const { return t >= 0 && t < length_; }

  std::span<const double> state(int t) const;
  std::span<const double> obs(int t, int agent) const;
  std::span<const std::uint8_t> avail(int t, int agent) const;
  int action(int t, int agent) const { return actions_[idx(t) * shape_.n_agents + agent]; }
  double reward(int t) const { return rewards_[idx(t)]; }
  bool terminated(int t) const { return terminated_[idx(t)] != 0; }

  /// Materialized step; t beyond length gives a zero padded step.
  Transition step(int t) const;

  /// Checks every structural invariant; throws std::invalid_argument.
  void validate() const;

  friend bool operator==(const Episode&, const Episode&) = default;

  // raw storage, used by serialization
  const std::vector<double>& states_raw() const { return states_; }
  const std::vector<double>& obs_raw() const { return obs_; }
  const std::vector<std::uint8_t>& avail_raw() const { return avail_; }
  const std::vector<int>& actions_raw() const { return actions_; }
  const std::vector<double>& rewards_raw() const { return rewards_; }
  const std::vector<std::uint8_t>& terminated_raw() const { return terminated_; }
  static Episode from_raw(EpisodeShape shape, int length, std::vector<double> states, std::vector<double> obs,
                          std::vector<std::uint8_t> avail, std::vector<int> actions, std::vector<double> rewards,
                          std::vector<std::uint8_t> terminated);

 private:
  std::size_t idx(int t) const;

  EpisodeShape shape_{};
  int length_ = 0;
  std::vector<double> states_;
  std::vector<double> obs_;
  std::vector<std::uint8_t> avail_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminated_;
};

}  // namespace macpo
