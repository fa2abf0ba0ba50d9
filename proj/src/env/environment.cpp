#include "macpo/env/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "macpo/env/matrix_game.hpp"

namespace macpo {

std::string to_string(EnvVariant v) { return v == EnvVariant::predator_prey ? "predator_prey" : "matrix_game"; }

EnvVariant env_variant_from_string(const std::string& s) {
  if (s == "predator_prey") return EnvVariant::predator_prey;
  if (s == "matrix_game") return EnvVariant::matrix_game;
  throw std::invalid_argument("unknown environment variant '" + s + "'");
}

void EnvSpec::validate() const {
  if (n_agents <= 0) throw std::invalid_argument("n_agents must be positive");
  if (episode_limit <= 0) throw std::invalid_argument("episode_limit must be positive");
  if (variant == EnvVariant::predator_prey) {
    if (grid_w <= 0 || grid_h <= 0) throw std::invalid_argument("grid dimensions must be positive");
    if (n_prey <= 0) throw std::invalid_argument("n_prey must be positive");
    if (punishment > 0.0) throw std::invalid_argument("punishment must be <= 0");
    if (obs_size <= 0 || obs_size % 2 == 0) throw std::invalid_argument("obs_size must be a positive odd number");
    if (n_agents + n_prey > grid_w * grid_h) throw std::invalid_argument("more entities than grid cells");
  } else {
    if (matrix_actions <= 0) throw std::invalid_argument("matrix_actions must be positive");
    std::size_t total = 1;
    for (int a = 0; a < n_agents; ++a) total *= static_cast<std::size_t>(matrix_actions);
    if (payoff.size() != total)
      throw std::invalid_argument("payoff has " + std::to_string(payoff.size()) + " entries, expected " +
                                  std::to_string(total));
    for (double p : payoff)
      if (!std::isfinite(p)) throw std::invalid_argument("payoff entries must be finite");
    if (episode_limit != 1) throw std::invalid_argument("matrix game episode_limit must be 1");
  }
}

EnvSpec scaled_predator_prey(double punishment) {
  EnvSpec s;
  s.variant = EnvVariant::predator_prey;
  s.grid_w = s.grid_h = 7;
  s.n_agents = 4;
  s.n_prey = 2;
  s.punishment = punishment;
  s.episode_limit = 100;
  return s;
}

EnvSpec full_predator_prey(double punishment) {
  EnvSpec s;
  s.variant = EnvVariant::predator_prey;
  s.grid_w = s.grid_h = 10;
  s.n_agents = 8;
  s.n_prey = 8;
  s.punishment = punishment;
  s.episode_limit = 200;
  return s;
}

EnvSpec hostile_matrix_game() {
  EnvSpec s;
  s.variant = EnvVariant::matrix_game;
  s.n_agents = 2;
  s.matrix_actions = 3;
  s.episode_limit = 1;
  s.payoff = {8, -12, -12, -12, 0, 0, -12, 0, 0};
  return s;
}

EnvSpec cooperative_matrix_game() {
  EnvSpec s;
  s.variant = EnvVariant::matrix_game;
  s.n_agents = 2;
  s.matrix_actions = 2;
  s.episode_limit = 1;
  s.payoff = {1, 0, 0, 0.5};
  return s;
}

Transition Environment::observe() const {
  Transition t;
  const int n = shape().n_agents;
  t.state = state();
  for (int a = 0; a < n; ++a) {
    t.obs.push_back(obs(a));
    t.avail.push_back(avail(a));
  }
  return t;
}

PredatorPreyEnv::PredatorPreyEnv(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

EpisodeShape PredatorPreyEnv::shape() const {
  return {spec_.n_agents, pp::kNumActions, pp::obs_dim(spec_), pp::state_dim(spec_), spec_.episode_limit};
}

void PredatorPreyEnv::reset(Rng& rng) { state_ = pp::reset(spec_, rng); }

std::pair<double, bool> PredatorPreyEnv::step(const JointAction& action, Rng& rng) {
  auto r = pp::step(spec_, state_, action, rng);
  state_ = std::move(r.next);
  return {r.reward, r.terminated};
}

std::vector<double> PredatorPreyEnv::state() const { return pp::global_state(state_); }
std::vector<double> PredatorPreyEnv::obs(int agent) const { return pp::observe(spec_, state_, agent); }
std::vector<std::uint8_t> PredatorPreyEnv::avail(int agent) const { return pp::avail_actions(state_, agent); }
std::string PredatorPreyEnv::render() const { return pp::render(state_); }

MatrixGameEnv::MatrixGameEnv(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

EpisodeShape MatrixGameEnv::shape() const { return {spec_.n_agents, spec_.matrix_actions, 1, 1, 1}; }

void MatrixGameEnv::reset(Rng&) { done_ = false; }

std::pair<double, bool> MatrixGameEnv::step(const JointAction& action, Rng&) {
  if (done_) throw std::logic_error("step called on a finished matrix game");
  const double r = matrix::payoff(spec_, action);
  done_ = true;
  return {r, true};
}

std::vector<std::uint8_t> MatrixGameEnv::avail(int) const {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(spec_.matrix_actions), 1);
}

std::string MatrixGameEnv::render() const { return done_ ? "[matrix game: done]\n" : "[matrix game]\n"; }

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  if (spec.variant == EnvVariant::predator_prey) return std::make_unique<PredatorPreyEnv>(spec);
  return std::make_unique<MatrixGameEnv>(spec);
}

EpisodeShape episode_shape(const EnvSpec& spec) { return make_environment(spec)->shape(); }

}  // namespace macpo
