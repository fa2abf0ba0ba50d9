#include "macpo/nn/agent_net.hpp"

#include <stdexcept>

namespace macpo::nn {

AgentNet::AgentNet(int obs_dim, int n_actions, int n_agents, int hidden)
    : obs_dim_(obs_dim),
      n_actions_(n_actions),
      n_agents_(n_agents),
      mlp_({obs_dim + n_actions + n_agents, hidden, hidden, n_actions},
           {Activation::relu, Activation::relu, Activation::identity}),
      params_(mlp_.param_count()) {}

void AgentNet::init(Rng& rng) { mlp_.init(params_.mutable_values(), rng); }

void AgentNet::fill_input(Matrix& inputs, Eigen::Index col, std::span<const double> obs, int last_action,
                          int agent) const {
  if (obs.size() != static_cast<std::size_t>(obs_dim_)) throw std::invalid_argument("AgentNet: observation size");
  if (agent < 0 || agent >= n_agents_) throw std::invalid_argument("AgentNet: agent id out of range");
  auto c = inputs.col(col);
  c.setZero();
  for (int i = 0; i < obs_dim_; ++i) c(i) = obs[static_cast<std::size_t>(i)];
  if (last_action >= 0) c(obs_dim_ + last_action) = 1.0;
  c(obs_dim_ + n_actions_ + agent) = 1.0;
}

Matrix AgentNet::forward(const Matrix& inputs, MlpCache* cache) const {
  return mlp_.forward(ParamView::of(params_), inputs, cache);
}

Matrix AgentNet::backward(const MlpCache& cache, const Matrix& grad_utilities, std::span<double> grad) const {
  return mlp_.backward(ParamView::of(params_), cache, grad_utilities, grad);
}

std::vector<double> AgentNet::utilities(std::span<const double> obs, int last_action, int agent) const {
  Matrix in(input_dim(), 1);
  fill_input(in, 0, obs, last_action, agent);
  Matrix out = forward(in);
  return {out.data(), out.data() + out.size()};
}

}  // namespace macpo::nn
