#include "macpo/learner/targets.hpp"

#include <stdexcept>

#include "macpo/learner/batch.hpp"

namespace macpo {

std::vector<double> td_lambda_targets(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
                                      std::span<const std::uint8_t> mask, std::span<const double> next_value,
                                      int batch, int time, double gamma, double lambda, kernels::ExecPolicy policy) {
  const auto S = static_cast<std::size_t>(batch) * static_cast<std::size_t>(time);
  if (rewards.size() != S || terminated.size() != S || mask.size() != S || next_value.size() != S)
    throw std::invalid_argument("td_lambda_targets: input sizes do not match batch*time");
  std::vector<double> out(S, 0.0);
  kernels::td_lambda(policy, rewards, terminated, mask, next_value, batch, time, gamma, lambda, out);
  return out;
}

std::size_t EpisodeBatch::filled_count() const {
  std::size_t c = 0;
  for (auto m : mask) c += m;
  return c;
}

EpisodeBatch EpisodeBatch::from_episodes(const std::vector<const Episode*>& episodes, const nn::AgentNet& net) {
  if (episodes.empty()) throw std::invalid_argument("EpisodeBatch: no episodes");
  const EpisodeShape shape = episodes.front()->shape();
  EpisodeBatch b;
  b.batch = static_cast<int>(episodes.size());
  b.n_agents = shape.n_agents;
  b.n_actions = shape.n_actions;
  b.state_dim = shape.state_dim;
  for (const Episode* e : episodes) {
    if (!(e->shape() == shape)) throw std::invalid_argument("EpisodeBatch: mixed episode shapes");
    b.time = std::max(b.time, e->length());
  }
  if (net.n_agents() != shape.n_agents || net.n_actions() != shape.n_actions || net.obs_dim() != shape.obs_dim)
    throw std::invalid_argument("EpisodeBatch: agent network does not match episode shape");
  const auto S = static_cast<std::size_t>(b.samples());
  const auto n = static_cast<std::size_t>(b.n_agents);
  const auto m = static_cast<std::size_t>(b.n_actions);
  b.states = nn::Matrix::Zero(b.state_dim, static_cast<Eigen::Index>(S));
  b.agent_inputs = nn::Matrix::Zero(net.input_dim(), static_cast<Eigen::Index>(S * n));
  b.avail.assign(S * n * m, 1);
  b.actions.assign(S * n, 0);
  b.rewards.assign(S, 0.0);
  b.terminated.assign(S, 0);
  b.mask.assign(S, 0);
  const std::vector<double> zero_obs(static_cast<std::size_t>(shape.obs_dim), 0.0);
  for (int e = 0; e < b.batch; ++e) {
    const Episode& ep = *episodes[static_cast<std::size_t>(e)];
    for (int t = 0; t < b.time; ++t) {
      const std::size_t s = static_cast<std::size_t>(e) * static_cast<std::size_t>(b.time) + static_cast<std::size_t>(t);
      const bool filled = ep.filled(t);
      for (int a = 0; a < b.n_agents; ++a) {
        const std::size_t col = s * n + static_cast<std::size_t>(a);
        const int last = (filled && t > 0) ? ep.action(t - 1, a) : -1;
        net.fill_input(b.agent_inputs, static_cast<Eigen::Index>(col), filled ? ep.obs(t, a) : zero_obs, last, a);
        if (filled) {
          auto av = ep.avail(t, a);
          std::copy(av.begin(), av.end(), b.avail.begin() + static_cast<std::ptrdiff_t>(col * m));
          b.actions[col] = ep.action(t, a);
        }
      }
      if (!filled) continue;
      auto st = ep.state(t);
      for (int d = 0; d < b.state_dim; ++d) b.states(d, static_cast<Eigen::Index>(s)) = st[static_cast<std::size_t>(d)];
      b.rewards[s] = ep.reward(t);
      b.terminated[s] = ep.terminated(t);
      b.mask[s] = 1;
    }
  }
  return b;
}

}  // namespace macpo
