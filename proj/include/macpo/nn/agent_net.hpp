#pragma once

#include <span>
#include <vector>

#include "macpo/nn/mlp.hpp"

namespace macpo::nn {

/// Utility network shared by all agents. Input is
/// [observation, one-hot(last action), one-hot(agent id)]; output is one
/// utility per action.
class AgentNet {
 public:
  AgentNet() = default;
  AgentNet(int obs_dim, int n_actions, int n_agents, int hidden);

  int obs_dim() const { return obs_dim_; }
  int n_actions() const { return n_actions_; }
  int n_agents() const { return n_agents_; }
  int input_dim() const { return obs_dim_ + n_actions_ + n_agents_; }

  void init(Rng& rng);
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  const Mlp& mlp() const { return mlp_; }

  /// last_action < 0 means no previous action (first step).
  void fill_input(Matrix& inputs, Eigen::Index col, std::span<const double> obs, int last_action, int agent) const;

  Matrix forward(const Matrix& inputs, MlpCache* cache = nullptr) const;
  Matrix backward(const MlpCache& cache, const Matrix& grad_utilities, std::span<double> grad) const;

  std::vector<double> utilities(std::span<const double> obs, int last_action, int agent) const;

 private:
  int obs_dim_ = 0;
  int n_actions_ = 0;
  int n_agents_ = 0;
  Mlp mlp_;
  Parameters params_;
};

}  // namespace macpo::nn
