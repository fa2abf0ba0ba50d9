#include "macpo/episode.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace macpo {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("malformed episode: " + what);
}

}  // namespace

Episode::Episode(EpisodeShape shape) : shape_(shape) {
  require(shape.n_agents > 0 && shape.n_actions > 0 && shape.obs_dim >= 0 && shape.state_dim >= 0 &&
              shape.episode_limit > 0,
          "nonpositive shape");
}

std::size_t Episode::idx(int t) const {
  if (t < 0 || t >= length_) throw std::out_of_range("episode step " + std::to_string(t) + " not filled");
  return static_cast<std::size_t>(t);
}

std::span<const double> Episode::state(int t) const {
  const auto sd = static_cast<std::size_t>(shape_.state_dim);
  return {states_.data() + idx(t) * sd, sd};
}

std::span<const double> Episode::obs(int t, int agent) const {
  const auto od = static_cast<std::size_t>(shape_.obs_dim);
  return {obs_.data() + (idx(t) * shape_.n_agents + agent) * od, od};
}

std::span<const std::uint8_t> Episode::avail(int t, int agent) const {
  const auto m = static_cast<std::size_t>(shape_.n_actions);
  return {avail_.data() + (idx(t) * shape_.n_agents + agent) * m, m};
}

void Episode::push(const Transition& s) {
  const auto n = static_cast<std::size_t>(shape_.n_agents);
  require(length_ < shape_.episode_limit, "push beyond episode_limit");
  require(length_ == 0 || !terminated_.back(), "push after terminal step");
  require(s.state.size() == static_cast<std::size_t>(shape_.state_dim), "state dimension");
  require(s.obs.size() == n, "observation count " + std::to_string(s.obs.size()) + " != n_agents");
  require(s.avail.size() == n, "availability count != n_agents");
  require(s.action.size() == n, "joint action length != n_agents");
  require(std::isfinite(s.reward), "nonfinite reward");
  require(s.filled, "pushed step must be filled");
  for (std::size_t a = 0; a < n; ++a) {
    require(s.obs[a].size() == static_cast<std::size_t>(shape_.obs_dim), "observation dimension");
    require(s.avail[a].size() == static_cast<std::size_t>(shape_.n_actions), "availability dimension");
    const int u = s.action[a];
    require(u >= 0 && u < shape_.n_actions && s.avail[a][static_cast<std::size_t>(u)],
            "agent " + std::to_string(a) + " took unavailable action");
  }
  states_.insert(states_.end(), s.state.begin(), s.state.end());
  for (std::size_t a = 0; a < n; ++a) {
    obs_.insert(obs_.end(), s.obs[a].begin(), s.obs[a].end());
    avail_.insert(avail_.end(), s.avail[a].begin(), s.avail[a].end());
    actions_.push_back(s.action[a]);
  }
  rewards_.push_back(s.reward);
  terminated_.push_back(s.terminated ? 1 : 0);
  ++length_;
}

Transition Episode::step(int t) const {
  Transition out;
  const auto n = static_cast<std::size_t>(shape_.n_agents);
  if (!filled(t)) {
    out.state.assign(static_cast<std::size_t>(shape_.state_dim), 0.0);
    out.obs.assign(n, std::vector<double>(static_cast<std::size_t>(shape_.obs_dim), 0.0));
    out.avail.assign(n, std::vector<std::uint8_t>(static_cast<std::size_t>(shape_.n_actions), 0));
    out.action.actions.assign(n, 0);
    out.filled = false;
    return out;
  }
  auto st = state(t);
  out.state.assign(st.begin(), st.end());
  for (std::size_t a = 0; a < n; ++a) {
    auto o = obs(t, static_cast<int>(a));
    auto av = avail(t, static_cast<int>(a));
    out.obs.emplace_back(o.begin(), o.end());
    out.avail.emplace_back(av.begin(), av.end());
    out.action.actions.push_back(action(t, static_cast<int>(a)));
  }
  out.reward = reward(t);
  out.terminated = terminated(t);
  return out;
}

void Episode::validate() const {
  require(shape_.n_agents > 0 && shape_.n_actions > 0 && shape_.episode_limit > 0, "nonpositive shape");
  require(length_ >= 1 && length_ <= shape_.episode_limit, "length outside [1, episode_limit]");
  const auto L = static_cast<std::size_t>(length_);
  const auto n = static_cast<std::size_t>(shape_.n_agents);
  require(states_.size() == L * static_cast<std::size_t>(shape_.state_dim), "state storage size");
  require(obs_.size() == L * n * static_cast<std::size_t>(shape_.obs_dim), "observation storage size");
  require(avail_.size() == L * n * static_cast<std::size_t>(shape_.n_actions), "availability storage size");
  require(actions_.size() == L * n, "action storage size");
  require(rewards_.size() == L && terminated_.size() == L, "reward/termination storage size");
  for (std::size_t t = 0; t < L; ++t) {
    require(std::isfinite(rewards_[t]), "nonfinite reward");
    require(!terminated_[t] || t + 1 == L, "terminated flag before last step");
    for (std::size_t a = 0; a < n; ++a) {
      const int u = actions_[t * n + a];
      require(u >= 0 && u < shape_.n_actions, "action index out of range");
      require(avail_[(t * n + a) * static_cast<std::size_t>(shape_.n_actions) + static_cast<std::size_t>(u)] != 0,
              "unavailable action stored");
    }
  }
}

Episode Episode::from_raw(EpisodeShape shape, int length, std::vector<double> states, std::vector<double> obs,
                          std::vector<std::uint8_t> avail, std::vector<int> actions, std::vector<double> rewards,
                          std::vector<std::uint8_t> terminated) {
  Episode e(shape);
  e.length_ = length;
  e.states_ = std::move(states);
  e.obs_ = std::move(obs);
  e.avail_ = std::move(avail);
  e.actions_ = std::move(actions);
  e.rewards_ = std::move(rewards);
  e.terminated_ = std::move(terminated);
  e.validate();
  return e;
}

}  // namespace macpo
