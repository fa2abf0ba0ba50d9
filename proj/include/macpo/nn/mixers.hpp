#pragma once

#include <span>

#include "macpo/kernels.hpp"
#include "macpo/nn/mlp.hpp"

namespace macpo::nn {

/// QMIX-style mixer. Hypernetworks map the global state to mixing weights
/// made nonnegative with an absolute value, so dQ_tot/dQ^a >= 0 everywhere:
///   hidden = elu(q . |W1(s)| + b1(s)),  Q_tot = hidden . |w2(s)| + V(s)
class MonotonicMixer {
 public:
  struct Cache {
    MlpCache w1, b1, w2, v;
    Matrix h1, b1_out, h2, v_out, z, q;
  };

  MonotonicMixer() = default;
  MonotonicMixer(int state_dim, int n_agents, int embed, int hyper_hidden);

  int state_dim() const { return state_dim_; }
  int n_agents() const { return n_agents_; }
  int embed() const { return embed_; }

  void init(Rng& rng);
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  void set_policy(kernels::ExecPolicy p) { policy_ = p; }

  const Mlp& hyper_w1() const { return hyper_w1_; }
  const Mlp& hyper_b1() const { return hyper_b1_; }
  const Mlp& hyper_w2() const { return hyper_w2_; }
  const Mlp& hyper_v() const { return hyper_v_; }

  /// states: state_dim x N, q: n_agents x N. Returns 1 x N.
  Matrix forward(const Matrix& states, const Matrix& q, Cache* cache = nullptr) const;
  /// Accumulates parameter gradients; returns dQ_tot/dq (n_agents x N).
  Matrix backward(const Cache& cache, const Matrix& d_q_tot, std::span<double> grad) const;

  double mix(std::span<const double> state, std::span<const double> q) const;

 private:
  ParamView view(std::size_t block) const;

  int state_dim_ = 0;
  int n_agents_ = 0;
  int embed_ = 0;
  Mlp hyper_w1_, hyper_b1_, hyper_w2_, hyper_v_;
  std::size_t offsets_[5] = {0, 0, 0, 0, 0};
  Parameters params_;
  kernels::ExecPolicy policy_ = kernels::ExecPolicy::serial;
};

/// Unconstrained joint-value estimator. Input is
/// [state, chosen utility per agent, one-hot chosen action per agent].
class UnrestrictedMixer {
 public:
  UnrestrictedMixer() = default;
  UnrestrictedMixer(int state_dim, int n_agents, int n_actions, int hidden);

  int input_dim() const { return state_dim_ + n_agents_ + n_agents_ * n_actions_; }
  int state_dim() const { return state_dim_; }
  int n_agents() const { return n_agents_; }
  int n_actions() const { return n_actions_; }

  void init(Rng& rng);
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  const Mlp& mlp() const { return mlp_; }

  void fill_input(Matrix& inputs, Eigen::Index col, std::span<const double> state, std::span<const double> q,
                  std::span<const int> actions) const;
  Matrix forward(const Matrix& inputs, MlpCache* cache = nullptr) const;
  Matrix backward(const MlpCache& cache, const Matrix& d_out, std::span<double> grad) const;

  double evaluate(std::span<const double> state, std::span<const double> q, std::span<const int> actions) const;

 private:
  int state_dim_ = 0;
  int n_agents_ = 0;
  int n_actions_ = 0;
  Mlp mlp_;
  Parameters params_;
};

}  // namespace macpo::nn
