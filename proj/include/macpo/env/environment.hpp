#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "macpo/env/env_spec.hpp"
#include "macpo/env/predator_prey.hpp"
#include "macpo/episode.hpp"
#include "macpo/rng.hpp"

namespace macpo {

/// Stateful adapter the rollout loop talks to. Each instance owns one
/// episode's state and is not shared between threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EpisodeShape shape() const = 0;
  virtual void reset(Rng& rng) = 0;
  /// Returns (reward, terminated). Termination includes the step limit.
  virtual std::pair<double, bool> step(const JointAction& action, Rng& rng) = 0;

  virtual std::vector<double> state() const = 0;
  virtual std::vector<double> obs(int agent) const = 0;
  virtual std::vector<std::uint8_t> avail(int agent) const = 0;
  virtual std::string render() const = 0;

  /// Observation bundle for the current state with an empty action.
  Transition observe() const;
};

class PredatorPreyEnv final : public Environment {
 public:
  explicit PredatorPreyEnv(EnvSpec spec);
  EpisodeShape shape() const override;
  void reset(Rng& rng) override;
  std::pair<double, bool> step(const JointAction& action, Rng& rng) override;
  std::vector<double> state() const override;
  std::vector<double> obs(int agent) const override;
  std::vector<std::uint8_t> avail(int agent) const override;
  std::string render() const override;
  const pp::State& raw() const { return state_; }

 private:
  EnvSpec spec_;
  pp::State state_;
};

class MatrixGameEnv final : public Environment {
 public:
  explicit MatrixGameEnv(EnvSpec spec);
  EpisodeShape shape() const override;
  void reset(Rng& rng) override;
  std::pair<double, bool> step(const JointAction& action, Rng& rng) override;
  std::vector<double> state() const override { return {1.0}; }
  std::vector<double> obs(int) const override { return {1.0}; }
  std::vector<std::uint8_t> avail(int agent) const override;
  std::string render() const override;

 private:
  EnvSpec spec_;
  bool done_ = false;
};

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);
EpisodeShape episode_shape(const EnvSpec& spec);

}  // namespace macpo
