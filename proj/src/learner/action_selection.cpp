#include "macpo/learner/action_selection.hpp"

#include <algorithm>
#include <stdexcept>

namespace macpo {

double epsilon_at(long step, double start, double finish, long anneal_steps) {
  if (anneal_steps <= 0 || step >= anneal_steps) return finish;
  if (step <= 0) return start;
  const double frac = static_cast<double>(step) / static_cast<double>(anneal_steps);
  return start + (finish - start) * frac;
}

int greedy_action(std::span<const double> utilities, std::span<const std::uint8_t> avail) {
  int best = -1;
  for (std::size_t i = 0; i < utilities.size(); ++i)
    if (avail[i] && (best < 0 || utilities[i] > utilities[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
  if (best < 0) throw std::invalid_argument("greedy_action: no available action");
  return best;
}

int select_action(std::span<const double> utilities, std::span<const std::uint8_t> avail, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  const double u = rng.uniform();
  if (u < epsilon) {
    const auto count = static_cast<std::size_t>(std::count_if(avail.begin(), avail.end(), [](auto x) { return x != 0; }));
    if (count == 0) throw std::invalid_argument("select_action: no available action");
    std::size_t pick = rng.below(count);
    for (std::size_t i = 0; i < avail.size(); ++i)
      if (avail[i] && pick-- == 0) return static_cast<int>(i);
  }
  return greedy_action(utilities, avail);
}

JointAction select_actions(const nn::AgentNet& net, const std::vector<std::vector<double>>& obs,
                           const std::vector<int>& last_actions, const std::vector<std::vector<std::uint8_t>>& avail,
                           double epsilon, Rng& rng) {
  const int n = net.n_agents();
  if (obs.size() != static_cast<std::size_t>(n) || avail.size() != obs.size() || last_actions.size() != obs.size())
    throw std::invalid_argument("select_actions: per-agent inputs do not match agent count");
  nn::Matrix in(net.input_dim(), n);
  for (int a = 0; a < n; ++a)
    net.fill_input(in, a, obs[static_cast<std::size_t>(a)], last_actions[static_cast<std::size_t>(a)], a);
  const nn::Matrix q = net.forward(in);
  JointAction u;
  u.actions.resize(static_cast<std::size_t>(n));
  const auto m = static_cast<std::size_t>(net.n_actions());
  for (int a = 0; a < n; ++a)
    u.actions[static_cast<std::size_t>(a)] =
        select_action(std::span<const double>(q.col(a).data(), m), avail[static_cast<std::size_t>(a)], epsilon, rng);
  return u;
}

}  // namespace macpo
