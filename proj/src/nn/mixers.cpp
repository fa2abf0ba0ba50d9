#include "macpo/nn/mixers.hpp"

#include <stdexcept>

namespace macpo::nn {

MonotonicMixer::MonotonicMixer(int state_dim, int n_agents, int embed, int hyper_hidden)
    : state_dim_(state_dim),
      n_agents_(n_agents),
      embed_(embed),
      hyper_w1_({state_dim, hyper_hidden, n_agents * embed}, {Activation::relu, Activation::identity}),
      hyper_b1_({state_dim, embed}, {Activation::identity}),
      hyper_w2_({state_dim, hyper_hidden, embed}, {Activation::relu, Activation::identity}),
      hyper_v_({state_dim, embed, 1}, {Activation::relu, Activation::identity}) {
  offsets_[0] = 0;
  offsets_[1] = offsets_[0] + hyper_w1_.param_count();
  offsets_[2] = offsets_[1] + hyper_b1_.param_count();
  offsets_[3] = offsets_[2] + hyper_w2_.param_count();
  offsets_[4] = offsets_[3] + hyper_v_.param_count();
  params_ = Parameters(offsets_[4]);
}

ParamView MonotonicMixer::view(std::size_t block) const {
  return ParamView::of(params_, offsets_[block], offsets_[block + 1] - offsets_[block]);
}

void MonotonicMixer::init(Rng& rng) {
  auto p = params_.mutable_values();
  hyper_w1_.init(p.subspan(offsets_[0], offsets_[1] - offsets_[0]), rng);
  hyper_b1_.init(p.subspan(offsets_[1], offsets_[2] - offsets_[1]), rng);
  hyper_w2_.init(p.subspan(offsets_[2], offsets_[3] - offsets_[2]), rng);
  hyper_v_.init(p.subspan(offsets_[3], offsets_[4] - offsets_[3]), rng);
}

Matrix MonotonicMixer::forward(const Matrix& states, const Matrix& q, Cache* cache) const {
  if (states.rows() != state_dim_ || q.rows() != n_agents_ || states.cols() != q.cols())
    throw std::invalid_argument("MonotonicMixer::forward: dimension mismatch");
  Cache local;
  Cache& c = cache ? *cache : local;
  c.h1 = hyper_w1_.forward(view(0), states, cache ? &c.w1 : nullptr);
  c.b1_out = hyper_b1_.forward(view(1), states, cache ? &c.b1 : nullptr);
  c.h2 = hyper_w2_.forward(view(2), states, cache ? &c.w2 : nullptr);
  c.v_out = hyper_v_.forward(view(3), states, cache ? &c.v : nullptr);
  c.q = q;
  Matrix q_tot;
  kernels::mix_forward(policy_, {c.h1, c.b1_out, c.h2, c.v_out, c.q}, c.z, q_tot);
  return q_tot;
}

Matrix MonotonicMixer::backward(const Cache& c, const Matrix& d_q_tot, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("MonotonicMixer::backward: gradient size");
  if (d_q_tot.rows() != 1 || d_q_tot.cols() != c.q.cols())
    throw std::invalid_argument("MonotonicMixer::backward: output gradient shape");
  kernels::MixGrads g;
  kernels::mix_backward(policy_, {c.h1, c.b1_out, c.h2, c.v_out, c.q}, c.z, d_q_tot, g);
  auto sub = [&](std::size_t k) { return grad.subspan(offsets_[k], offsets_[k + 1] - offsets_[k]); };
  hyper_w1_.backward(view(0), c.w1, g.h1, sub(0));
  hyper_b1_.backward(view(1), c.b1, g.b1, sub(1));
  hyper_w2_.backward(view(2), c.w2, g.h2, sub(2));
  hyper_v_.backward(view(3), c.v, g.v, sub(3));
  return g.q;
}

double MonotonicMixer::mix(std::span<const double> state, std::span<const double> q) const {
  Matrix s = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
  Matrix u = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  return forward(s, u)(0, 0);
}

UnrestrictedMixer::UnrestrictedMixer(int state_dim, int n_agents, int n_actions, int hidden)
    : state_dim_(state_dim),
      n_agents_(n_agents),
      n_actions_(n_actions),
      mlp_({state_dim + n_agents + n_agents * n_actions, hidden, hidden, 1},
           {Activation::relu, Activation::relu, Activation::identity}),
      params_(mlp_.param_count()) {}

void UnrestrictedMixer::init(Rng& rng) { mlp_.init(params_.mutable_values(), rng); }

void UnrestrictedMixer::fill_input(Matrix& inputs, Eigen::Index col, std::span<const double> state,
                                   std::span<const double> q, std::span<const int> actions) const {
  if (state.size() != static_cast<std::size_t>(state_dim_) || q.size() != static_cast<std::size_t>(n_agents_) ||
      actions.size() != static_cast<std::size_t>(n_agents_))
    throw std::invalid_argument("UnrestrictedMixer: input dimension mismatch");
  auto c = inputs.col(col);
  c.setZero();
  for (int i = 0; i < state_dim_; ++i) c(i) = state[static_cast<std::size_t>(i)];
  for (int a = 0; a < n_agents_; ++a) {
    c(state_dim_ + a) = q[static_cast<std::size_t>(a)];
    const int u = actions[static_cast<std::size_t>(a)];
    if (u < 0 || u >= n_actions_) throw std::invalid_argument("UnrestrictedMixer: action out of range");
    c(state_dim_ + n_agents_ + a * n_actions_ + u) = 1.0;
  }
}

Matrix UnrestrictedMixer::forward(const Matrix& inputs, MlpCache* cache) const {
  return mlp_.forward(ParamView::of(params_), inputs, cache);
}

Matrix UnrestrictedMixer::backward(const MlpCache& cache, const Matrix& d_out, std::span<double> grad) const {
  return mlp_.backward(ParamView::of(params_), cache, d_out, grad);
}

double UnrestrictedMixer::evaluate(std::span<const double> state, std::span<const double> q,
                                   std::span<const int> actions) const {
  Matrix in(input_dim(), 1);
  fill_input(in, 0, state, q, actions);
  return forward(in)(0, 0);
}

}  // namespace macpo::nn
