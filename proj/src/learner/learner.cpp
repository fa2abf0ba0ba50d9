#include "macpo/learner/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "macpo/learner/action_selection.hpp"
#include "macpo/learner/targets.hpp"

namespace macpo {

namespace {

std::span<const double> column(const nn::Matrix& m, Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

int argmax_available(const nn::Matrix& u, Eigen::Index col, const std::uint8_t* avail) {
  int best = -1;
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    if (!avail[k]) continue;
    if (best < 0 || u(k, col) > u(best, col)) best = static_cast<int>(k);
  }
  return best < 0 ? 0 : best;
}

nn::CheckpointBlock make_block(std::string name, std::vector<const nn::Mlp*> mlps, std::span<const double> values) {
  nn::CheckpointBlock b;
  b.name = std::move(name);
  for (const nn::Mlp* m : mlps) b.layer_sizes.push_back(m->sizes());
  b.values.assign(values.begin(), values.end());
  return b;
}

void restore(const nn::Checkpoint& ckpt, const std::string& name, std::vector<const nn::Mlp*> mlps,
             nn::Parameters& params) {
  const nn::CheckpointBlock& b = ckpt.block(name);
  std::vector<std::vector<int>> sizes;
  for (const nn::Mlp* m : mlps) sizes.push_back(m->sizes());
  if (b.layer_sizes != sizes || b.values.size() != params.size())
    throw std::runtime_error("checkpoint block '" + name + "' does not match the configured network");
  std::ranges::copy(b.values, params.mutable_values().begin());
}

void restore_vec(const nn::Checkpoint& ckpt, const std::string& name, std::vector<double>& out) {
  const nn::CheckpointBlock& b = ckpt.block(name);
  if (b.values.size() != out.size())
    throw std::runtime_error("checkpoint block '" + name + "' has the wrong size");
  out = b.values;
}

}  // namespace

struct Learner::Forward {
  nn::Matrix utilities, target_utilities;
  nn::MlpCache agent_cache;
  nn::Matrix chosen;  // n x S
  nn::Matrix q_tot;
  nn::MonotonicMixer::Cache mixer_cache;
  nn::Matrix central_in;
  nn::Matrix q_star;
  nn::MlpCache central_cache;
  std::vector<double> targets, central_targets, probs;
};

Learner::Learner(const RunConfig& cfg, const EpisodeShape& shape, Rng init_rng, kernels::ExecPolicy policy)
    : cfg_(cfg),
      shape_(shape),
      policy_(policy),
      agent_(shape.obs_dim, shape.n_actions, shape.n_agents, cfg.agent_hidden),
      mixer_(shape.state_dim, shape.n_agents, cfg.mixer_embed, cfg.hypernet_hidden),
      central_(shape.state_dim, shape.n_agents, shape.n_actions, cfg.central_hidden) {
  Rng ra = init_rng.split(1), rm = init_rng.split(2), rc = init_rng.split(3);
  agent_.init(ra);
  mixer_.init(rm);
  central_.init(rc);
  mixer_.set_policy(policy);
  target_agent_ = agent_;
  target_mixer_ = mixer_;
  target_central_ = central_;
  agent_opt_ = nn::AdamState(agent_.params().size());
  mixer_opt_ = nn::AdamState(mixer_.params().size());
  central_opt_ = nn::AdamState(central_.params().size());
}

EpisodeBatch Learner::make_batch(const std::vector<const Episode*>& episodes) const {
  return EpisodeBatch::from_episodes(episodes, agent_);
}

void Learner::forward_all(const EpisodeBatch& batch, Forward& f, bool with_cache) const {
  const int n = batch.n_agents;
  const int m = batch.n_actions;
  const int S = batch.samples();
  const auto nn_ = static_cast<std::size_t>(n);
  const auto mm = static_cast<std::size_t>(m);
  if (n != shape_.n_agents || m != shape_.n_actions || batch.state_dim != shape_.state_dim)
    throw std::invalid_argument("Learner: batch does not match the learner's shape");

  f.utilities = agent_.forward(batch.agent_inputs, with_cache ? &f.agent_cache : nullptr);
  f.target_utilities = target_agent_.forward(batch.agent_inputs);

  f.chosen.resize(n, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < n; ++a) {
      const std::size_t col = static_cast<std::size_t>(s) * nn_ + static_cast<std::size_t>(a);
      f.chosen(a, s) = f.utilities(batch.actions[col], static_cast<Eigen::Index>(col));
    }
  f.q_tot = mixer_.forward(batch.states, f.chosen, with_cache ? &f.mixer_cache : nullptr);

  // Greedy next actions and target utilities at them. Column s holds the
  // values for step t+1; left at zero where that step does not exist.
  nn::Matrix next_states = nn::Matrix::Zero(batch.state_dim, S);
  nn::Matrix next_q = nn::Matrix::Zero(n, S);
  std::vector<int> next_actions(static_cast<std::size_t>(S) * nn_, 0);
  std::vector<std::uint8_t> has_next(static_cast<std::size_t>(S), 0);
  const nn::Matrix& select_from = cfg_.double_q ? f.utilities : f.target_utilities;
  for (int b = 0; b < batch.batch; ++b)
    for (int t = 0; t + 1 < batch.time; ++t) {
      const int s = b * batch.time + t;
      if (!batch.mask[static_cast<std::size_t>(s + 1)]) continue;
      has_next[static_cast<std::size_t>(s)] = 1;
      next_states.col(s) = batch.states.col(s + 1);
      for (int a = 0; a < n; ++a) {
        const std::size_t col = static_cast<std::size_t>(s + 1) * nn_ + static_cast<std::size_t>(a);
        const int g = argmax_available(select_from, static_cast<Eigen::Index>(col), &batch.avail[col * mm]);
        next_actions[static_cast<std::size_t>(s) * nn_ + static_cast<std::size_t>(a)] = g;
        next_q(a, s) = f.target_utilities(g, static_cast<Eigen::Index>(col));
      }
    }
  const nn::Matrix next_tot = target_mixer_.forward(next_states, next_q);

  const int cin = central_.input_dim();
  nn::Matrix next_central_in = nn::Matrix::Zero(cin, S);
  f.central_in.resize(cin, S);
  for (int s = 0; s < S; ++s) {
    std::span<const int> acts{batch.actions.data() + static_cast<std::size_t>(s) * nn_, nn_};
    central_.fill_input(f.central_in, s, column(batch.states, s), column(f.chosen, s), acts);
    std::span<const int> nacts{next_actions.data() + static_cast<std::size_t>(s) * nn_, nn_};
    central_.fill_input(next_central_in, s, column(next_states, s), column(next_q, s), nacts);
  }
  f.q_star = central_.forward(f.central_in, with_cache ? &f.central_cache : nullptr);
  const nn::Matrix next_star = target_central_.forward(next_central_in);

  std::vector<double> nv(static_cast<std::size_t>(S), 0.0), nv_star(static_cast<std::size_t>(S), 0.0);
  for (int s = 0; s < S; ++s)
    if (has_next[static_cast<std::size_t>(s)]) {
      nv[static_cast<std::size_t>(s)] = next_tot(0, s);
      nv_star[static_cast<std::size_t>(s)] = next_star(0, s);
    }
  f.targets = td_lambda_targets(batch.rewards, batch.terminated, batch.mask, nv, batch.batch, batch.time, cfg_.gamma,
                                cfg_.td_lambda, policy_);
  f.central_targets = td_lambda_targets(batch.rewards, batch.terminated, batch.mask, nv_star, batch.batch,
                                        batch.time, cfg_.gamma, cfg_.td_lambda, policy_);

  f.probs.assign(static_cast<std::size_t>(S) * nn_, 1.0);
  kernels::taken_action_probs(policy_, f.utilities, batch.avail, batch.actions, n, f.probs);
}

StepEvaluation Learner::evaluate(const EpisodeBatch& batch) const {
  Forward f;
  forward_all(batch, f, false);
  return evaluation_from(batch, f);
}

StepEvaluation Learner::evaluation_from(const EpisodeBatch& batch, const Forward& f) const {
  const auto S = static_cast<std::size_t>(batch.samples());
  const auto n = static_cast<std::size_t>(batch.n_agents);
  StepEvaluation ev;
  ev.q_tot.assign(f.q_tot.data(), f.q_tot.data() + S);
  ev.q_star.assign(f.q_star.data(), f.q_star.data() + S);
  ev.targets = f.targets;
  ev.central_targets = f.central_targets;

  WeightInputs& wi = ev.weight_inputs;
  wi.bellman_error.assign(S, 0.0);
  wi.value_gap.assign(S, 0.0);
  wi.probs = f.probs;
  wi.filled = batch.mask;
  wi.n_agents = batch.n_agents;
  wi.episodes = batch.batch;
  wi.time = batch.time;
  for (std::size_t s = 0; s < S; ++s) {
    if (!batch.mask[s]) {
      for (std::size_t a = 0; a < n; ++a) wi.probs[s * n + a] = 1.0;
      continue;
    }
    wi.bellman_error[s] = std::abs(ev.q_tot[s] - ev.targets[s]);
    wi.value_gap[s] = std::abs(ev.q_tot[s] - ev.q_star[s]);
  }
  WeightOptions opt;
  opt.thresholds = cfg_.thresholds;
  opt.pser_decay = cfg_.pser_decay;
  opt.pser_window = cfg_.pser_window;
  opt.cap = cfg_.weight_cap;
  opt.policy = policy_;
  ev.weights = compute_weights(cfg_.scheme, wi, opt);
  return ev;
}

Gradients Learner::compute_gradients(const EpisodeBatch& batch,
                                     std::optional<std::span<const double>> fixed_weights) const {
  Forward f;
  forward_all(batch, f, true);
  Gradients g;
  g.eval = evaluation_from(batch, f);
  const int S = batch.samples();
  const int n = batch.n_agents;
  const auto N = static_cast<double>(std::max<std::size_t>(batch.filled_count(), 1));

  std::span<const double> w = g.eval.weights.w;
  if (fixed_weights) {
    if (fixed_weights->size() != static_cast<std::size_t>(S))
      throw std::invalid_argument("compute_gradients: fixed weight count does not match the batch");
    w = *fixed_weights;
  }

  nn::Matrix d_tot = nn::Matrix::Zero(1, S);
  nn::Matrix d_star = nn::Matrix::Zero(1, S);
  for (int s = 0; s < S; ++s) {
    const auto k = static_cast<std::size_t>(s);
    if (!batch.mask[k]) continue;
    const double delta = f.q_tot(0, s) - f.targets[k];
    g.loss += w[k] * delta * delta;
    d_tot(0, s) = 2.0 * w[k] * delta / N;
    const double ds = f.q_star(0, s) - f.central_targets[k];
    g.central_loss += ds * ds;
    d_star(0, s) = 2.0 * ds / N;
  }
  g.loss /= N;
  g.central_loss /= N;

  g.agent.assign(agent_.params().size(), 0.0);
  g.mixer.assign(mixer_.params().size(), 0.0);
  g.central.assign(central_.params().size(), 0.0);

  const nn::Matrix dq = mixer_.backward(f.mixer_cache, d_tot, g.mixer);
  nn::Matrix du = nn::Matrix::Zero(f.utilities.rows(), f.utilities.cols());
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < n; ++a) {
      const auto col = static_cast<std::size_t>(s) * static_cast<std::size_t>(n) + static_cast<std::size_t>(a);
      du(batch.actions[col], static_cast<Eigen::Index>(col)) = dq(a, s);
    }
  agent_.backward(f.agent_cache, du, g.agent);
  // The unrestricted mixer's utility inputs are treated as constants.
  central_.backward(f.central_cache, d_star, g.central);
  return g;
}

double Learner::weighted_loss(const EpisodeBatch& batch, std::span<const double> weights) const {
  Forward f;
  forward_all(batch, f, false);
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.mask.size(); ++k) {
    if (!batch.mask[k]) continue;
    const double d = f.q_tot(0, static_cast<Eigen::Index>(k)) - f.targets[k];
    loss += weights[k] * d * d;
  }
  return loss / static_cast<double>(std::max<std::size_t>(batch.filled_count(), 1));
}

double Learner::central_loss(const EpisodeBatch& batch) const {
  Forward f;
  forward_all(batch, f, false);
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.mask.size(); ++k) {
    if (!batch.mask[k]) continue;
    const double d = f.q_star(0, static_cast<Eigen::Index>(k)) - f.central_targets[k];
    loss += d * d;
  }
  return loss / static_cast<double>(std::max<std::size_t>(batch.filled_count(), 1));
}

void Learner::apply(Gradients& g) {
  // Agent and monotonic mixer share one clipping norm.
  double sq = 0.0;
  for (double x : g.agent) sq += x * x;
  for (double x : g.mixer) sq += x * x;
  const double norm = std::sqrt(sq);
  if (cfg_.grad_clip > 0.0 && norm > cfg_.grad_clip) {
    const double scale = cfg_.grad_clip / (norm + 1e-12);
    for (double& x : g.agent) x *= scale;
    for (double& x : g.mixer) x *= scale;
  }
  nn::clip_grad_norm(g.central, cfg_.grad_clip);
  nn::adam_step(agent_opt_, agent_.params().mutable_values(), g.agent, cfg_.learning_rate);
  nn::adam_step(mixer_opt_, mixer_.params().mutable_values(), g.mixer, cfg_.learning_rate);
  nn::adam_step(central_opt_, central_.params().mutable_values(), g.central, cfg_.learning_rate);
  ++train_steps_;
}

TrainMetrics Learner::train_step(const EpisodeBatch& batch) {
  Gradients g = compute_gradients(batch);
  if (!std::isfinite(g.loss) || !std::isfinite(g.central_loss)) {
    double max_q = 0.0;
    for (double q : g.eval.q_tot) max_q = std::max(max_q, std::abs(q));
    std::ostringstream msg;
    msg << "nonfinite loss at train step " << train_steps_ << ": loss=" << g.loss
        << " central_loss=" << g.central_loss << " max|Q_tot|=" << max_q
        << " raw_weight_max=" << g.eval.weights.raw_max;
    throw std::runtime_error(msg.str());
  }
  TrainMetrics tm;
  tm.loss = g.loss;
  tm.central_loss = g.central_loss;
  tm.raw_mean = g.eval.weights.raw_mean;
  tm.raw_max = g.eval.weights.raw_max;
  tm.entropy = g.eval.weights.entropy;
  tm.fallback_uniform = g.eval.weights.fallback_uniform;
  double qs = 0.0;
  for (std::size_t k = 0; k < batch.mask.size(); ++k)
    if (batch.mask[k]) qs += g.eval.q_tot[k];
  tm.mean_q = qs / static_cast<double>(std::max<std::size_t>(batch.filled_count(), 1));
  double sq = 0.0;
  for (double x : g.agent) sq += x * x;
  for (double x : g.mixer) sq += x * x;
  tm.grad_norm = std::sqrt(sq);
  apply(g);
  return tm;
}

bool Learner::maybe_update_targets(long episodes_seen) {
  const long interval = cfg_.target_update_interval;
  if (interval <= 0) return false;
  const long boundary = episodes_seen / interval;
  if (boundary <= last_target_boundary_) return false;
  last_target_boundary_ = boundary;
  update_targets();
  return true;
}

void Learner::update_targets() {
  target_agent_.params() = agent_.params();
  target_mixer_.params() = mixer_.params();
  target_central_.params() = central_.params();
}

nn::Checkpoint Learner::to_checkpoint() const {
  nn::Checkpoint c;
  c.config_text = serialize_config(cfg_);
  c.train_steps = static_cast<std::uint64_t>(train_steps_);
  const std::vector<const nn::Mlp*> mix = {&mixer_.hyper_w1(), &mixer_.hyper_b1(), &mixer_.hyper_w2(),
                                           &mixer_.hyper_v()};
  c.blocks.push_back(make_block("agent", {&agent_.mlp()}, agent_.params().values()));
  c.blocks.push_back(make_block("mixer", mix, mixer_.params().values()));
  c.blocks.push_back(make_block("central", {&central_.mlp()}, central_.params().values()));
  c.blocks.push_back(make_block("target_agent", {&agent_.mlp()}, target_agent_.params().values()));
  c.blocks.push_back(make_block("target_mixer", mix, target_mixer_.params().values()));
  c.blocks.push_back(make_block("target_central", {&central_.mlp()}, target_central_.params().values()));
  c.blocks.push_back(make_block("adam.agent.m", {}, agent_opt_.m));
  c.blocks.push_back(make_block("adam.agent.v", {}, agent_opt_.v));
  c.blocks.push_back(make_block("adam.mixer.m", {}, mixer_opt_.m));
  c.blocks.push_back(make_block("adam.mixer.v", {}, mixer_opt_.v));
  c.blocks.push_back(make_block("adam.central.m", {}, central_opt_.m));
  c.blocks.push_back(make_block("adam.central.v", {}, central_opt_.v));
  return c;
}

void Learner::load_checkpoint(const nn::Checkpoint& ckpt) {
  const std::vector<const nn::Mlp*> mix = {&mixer_.hyper_w1(), &mixer_.hyper_b1(), &mixer_.hyper_w2(),
                                           &mixer_.hyper_v()};
  restore(ckpt, "agent", {&agent_.mlp()}, agent_.params());
  restore(ckpt, "mixer", mix, mixer_.params());
  restore(ckpt, "central", {&central_.mlp()}, central_.params());
  restore(ckpt, "target_agent", {&agent_.mlp()}, target_agent_.params());
  restore(ckpt, "target_mixer", mix, target_mixer_.params());
  restore(ckpt, "target_central", {&central_.mlp()}, target_central_.params());
  restore_vec(ckpt, "adam.agent.m", agent_opt_.m);
  restore_vec(ckpt, "adam.agent.v", agent_opt_.v);
  restore_vec(ckpt, "adam.mixer.m", mixer_opt_.m);
  restore_vec(ckpt, "adam.mixer.v", mixer_opt_.v);
  restore_vec(ckpt, "adam.central.m", central_opt_.m);
  restore_vec(ckpt, "adam.central.v", central_opt_.v);
  train_steps_ = static_cast<long>(ckpt.train_steps);
  agent_opt_.step = mixer_opt_.step = central_opt_.step = train_steps_;
}

}  // namespace macpo
