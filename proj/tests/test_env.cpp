#include <doctest.h>

#include <set>

#include "macpo/env/environment.hpp"
#include "macpo/env/matrix_game.hpp"
#include "macpo/env/predator_prey.hpp"

using namespace macpo;
using namespace macpo::pp;

namespace {

State grid(int h, int w, std::vector<std::optional<Cell>> predators, std::vector<std::optional<Cell>> prey) {
  State s;
  s.grid_h = h;
  s.grid_w = w;
  s.predators = std::move(predators);
  s.prey = std::move(prey);
  return s;
}

std::vector<std::uint8_t> mask(std::initializer_list<int> on) {
  std::vector<std::uint8_t> m(kNumActions, 0);
  for (int a : on) m[static_cast<std::size_t>(a)] = 1;
  return m;
}

JointAction ja(std::vector<int> a) { return JointAction{std::move(a)}; }

}  // namespace

TEST_CASE("reset places entities on distinct cells") {
  const EnvSpec spec = full_predator_prey(0.0);
  Rng rng(4);
  const State s = reset(spec, rng);
  std::set<std::pair<int, int>> cells;
  for (auto& p : s.predators) cells.insert({p->row, p->col});
  for (auto& p : s.prey) cells.insert({p->row, p->col});
  CHECK(cells.size() == 16);

  Rng a(9), b(9);
  CHECK(reset(spec, a) == reset(spec, b));
}

TEST_CASE("reset rejects more entities than cells") {
  EnvSpec spec = scaled_predator_prey(0.0);
  spec.grid_w = spec.grid_h = 1;
  spec.n_agents = 1;
  spec.n_prey = 1;
  Rng rng(1);
  CHECK_THROWS_AS(reset(spec, rng), std::invalid_argument);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("avail: corner agent with empty neighbours") {
  const State s = grid(7, 7, {Cell{0, 0}}, {Cell{5, 5}});
  CHECK(avail_actions(s, 0) == mask({kDown, kRight, kStay}));
}

TEST_CASE("avail: surrounded agent, hand-checked table") {
  // centre (3,3); neighbours up (2,3), down (4,3), left (3,2), right (3,4)
  struct Row {
    std::vector<std::optional<Cell>> others;  // extra predators
    std::vector<std::optional<Cell>> prey;
    std::vector<std::uint8_t> expected;
  };
  const std::vector<Row> table{
      {{Cell{2, 3}, Cell{4, 3}, Cell{3, 2}, Cell{3, 4}}, {Cell{0, 0}}, mask({kStay})},
      {{Cell{2, 3}, Cell{4, 3}, Cell{3, 2}}, {Cell{3, 4}}, mask({kStay, kCatch})},
      {{Cell{2, 3}, Cell{4, 3}}, {Cell{3, 2}, Cell{3, 4}}, mask({kStay, kCatch})},
      {{Cell{2, 3}}, {Cell{4, 3}}, mask({kLeft, kRight, kStay, kCatch})},
      {{}, {Cell{2, 4}}, mask({kUp, kDown, kLeft, kRight, kStay})},  // diagonal prey is not adjacent
  };
  for (std::size_t i = 0; i < table.size(); ++i) {
    CAPTURE(i);
    std::vector<std::optional<Cell>> preds{Cell{3, 3}};
    for (auto& c : table[i].others) preds.push_back(c);
    const State s = grid(7, 7, preds, table[i].prey);
    CHECK(avail_actions(s, 0) == table[i].expected);
  }
}

TEST_CASE("avail: removed agent may only no-op") {
  const State s = grid(7, 7, {std::nullopt, Cell{1, 1}}, {Cell{5, 5}});
  CHECK(avail_actions(s, 0) == mask({kNoop}));
}

TEST_CASE("step: joint catch gives the capture reward and removes three entities") {
  EnvSpec spec = scaled_predator_prey(-1.5);
  spec.n_prey = 1;
  const State s = grid(7, 7, {Cell{2, 3}, Cell{4, 3}, Cell{0, 0}, Cell{6, 6}}, {Cell{3, 3}});
  Rng rng(1);
  const auto r = step(spec, s, ja({kCatch, kCatch, kStay, kStay}), rng);
  CHECK(r.reward == 10.0);
  CHECK(r.captures == 1);
  CHECK(live_predators(r.next) == 2);
  CHECK(live_prey(r.next) == 0);
  CHECK(r.terminated);  // no prey left
}

TEST_CASE("step: lone catch is punished") {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  const State s = grid(7, 7, {Cell{2, 3}, Cell{0, 0}, Cell{6, 0}, Cell{6, 6}}, {Cell{3, 3}, Cell{0, 6}});
  Rng rng(1);
  const auto r = step(spec, s, ja({kCatch, kStay, kStay, kStay}), rng);
  CHECK(r.reward == -1.5);
  CHECK(r.lone_attempts == 1);
  CHECK(live_predators(r.next) == 4);
}

TEST_CASE("step: all stay keeps predators in place with zero reward") {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  const State s = grid(7, 7, {Cell{1, 1}, Cell{1, 5}, Cell{5, 1}, Cell{5, 5}}, {Cell{3, 3}, Cell{0, 3}});
  Rng rng(2);
  const auto r = step(spec, s, ja({kStay, kStay, kStay, kStay}), rng);
  CHECK(r.reward == 0.0);
  CHECK(r.next.predators == s.predators);
  CHECK(r.next.step_index == 1);
  CHECK_FALSE(r.terminated);
}

TEST_CASE("step: unavailable action is rejected") {
  const EnvSpec spec = scaled_predator_prey(0.0);
  const State s = grid(7, 7, {Cell{0, 0}, Cell{1, 5}, Cell{5, 1}, Cell{5, 5}}, {Cell{3, 3}, Cell{0, 3}});
  Rng rng(2);
  CHECK_THROWS_AS(step(spec, s, ja({kUp, kStay, kStay, kStay}), rng), std::invalid_argument);
  CHECK_THROWS_AS(step(spec, s, ja({kCatch, kStay, kStay, kStay}), rng), std::invalid_argument);
}

TEST_CASE("step: movement conflicts go to the lower agent index") {
  const EnvSpec spec = scaled_predator_prey(0.0);
  // agents 0 and 1 both move into (3,3)
  const State s = grid(7, 7, {Cell{3, 2}, Cell{3, 4}, Cell{0, 0}, Cell{6, 6}}, {Cell{0, 6}, Cell{6, 0}});
  Rng rng(2);
  const auto r = step(spec, s, ja({kRight, kLeft, kStay, kStay}), rng);
  CHECK(r.next.predators[0] == Cell{3, 3});
  CHECK(r.next.predators[1] == Cell{3, 4});
}

TEST_CASE("episode ends at the step limit") {
  EnvSpec spec = scaled_predator_prey(0.0);
  spec.episode_limit = 3;
  PredatorPreyEnv env(spec);
  Rng rng(5);
  env.reset(rng);
  JointAction stay{std::vector<int>(4, kStay)};
  CHECK_FALSE(env.step(stay, rng).second);
  CHECK_FALSE(env.step(stay, rng).second);
  CHECK(env.step(stay, rng).second);
}

TEST_CASE("random rollouts conserve entities and decompose rewards") {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  Rng rng(17);
  for (int episode = 0; episode < 50; ++episode) {
    State s = reset(spec, rng);
    while (!s.done) {
      JointAction a;
      for (int i = 0; i < spec.n_agents; ++i) {
        const auto av = avail_actions(s, i);
        std::vector<int> ok;
        for (int u = 0; u < kNumActions; ++u)
          if (av[static_cast<std::size_t>(u)]) ok.push_back(u);
        a.actions.push_back(ok[rng.below(ok.size())]);
      }
      const auto r = step(spec, s, a, rng);
      CHECK(live_predators(s) - live_predators(r.next) == 2 * r.captures);
      CHECK(live_prey(r.next) <= live_prey(s));
      CHECK(r.reward == 10.0 * r.captures + spec.punishment * r.lone_attempts);
      s = r.next;
    }
  }
}

TEST_CASE("observation layout and off-grid encoding") {
  const EnvSpec spec = scaled_predator_prey(0.0);
  const State s = grid(7, 7, {Cell{0, 0}, Cell{1, 1}, Cell{6, 6}, Cell{5, 5}}, {Cell{0, 2}, Cell{4, 4}});
  const auto o = observe(spec, s, 0);
  REQUIRE(o.size() == static_cast<std::size_t>(obs_dim(spec)));
  CHECK(o.size() == 52u);
  // window rows/cols 0..4 map to grid offsets -2..2
  CHECK(o[0] == -1.0);            // (-2,-2) off grid
  CHECK(o[25 + 0] == -1.0);
  CHECK(o[2 * 5 + 2] == 1.0);     // self
  CHECK(o[3 * 5 + 3] == 1.0);     // predator 1 at (+1,+1)
  CHECK(o[25 + 2 * 5 + 4] == 1.0);  // prey at (0,+2)
  CHECK(o[50] == 0.0);
  CHECK(o[51] == 0.0);

  State removed = s;
  removed.predators[0].reset();
  for (double x : observe(spec, removed, 0)) CHECK(x == 0.0);
}

TEST_CASE("observation ignores cells outside the window") {
  const EnvSpec spec = scaled_predator_prey(0.0);
  const State s = grid(7, 7, {Cell{1, 1}, Cell{6, 6}, Cell{5, 0}, Cell{0, 6}}, {Cell{6, 3}, Cell{2, 2}});
  State moved = s;
  moved.predators[1] = Cell{6, 5};
  moved.prey[0] = Cell{5, 3};
  CHECK(observe(spec, s, 0) == observe(spec, moved, 0));
}

TEST_CASE("environment trajectories are deterministic") {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  auto run = [&](std::uint64_t seed) {
    PredatorPreyEnv env(spec);
    Rng rng(seed);
    env.reset(rng);
    std::string trace;
    bool done = false;
    while (!done) {
      JointAction a{std::vector<int>(4, kStay)};
      for (int i = 0; i < 4; ++i) {
        const auto av = env.avail(i);
        for (int u = 0; u < kNumActions; ++u)
          if (av[static_cast<std::size_t>(u)] && rng.below(2) == 0) a.actions[static_cast<std::size_t>(i)] = u;
        if (!av[static_cast<std::size_t>(a.actions[static_cast<std::size_t>(i)])])
          a.actions[static_cast<std::size_t>(i)] = kStay;
      }
      auto [r, term] = env.step(a, rng);
      trace += env.render() + std::to_string(r);
      done = term;
    }
    return trace;
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}

TEST_CASE("matrix game lookup and errors") {
  EnvSpec id;
  id.variant = EnvVariant::matrix_game;
  id.n_agents = 2;
  id.matrix_actions = 2;
  id.episode_limit = 1;
  id.payoff = {1, 0, 0, 1};
  CHECK(matrix::payoff(id, ja({0, 0})) == 1.0);
  CHECK(matrix::payoff(id, ja({0, 1})) == 0.0);
  CHECK_THROWS_AS(matrix::payoff(id, ja({2, 0})), std::out_of_range);
  CHECK_THROWS_AS(matrix::payoff(id, ja({0})), std::out_of_range);

  MatrixGameEnv env(id);
  Rng rng(1);
  env.reset(rng);
  CHECK(env.step(ja({1, 1}), rng) == std::pair<double, bool>{1.0, true});
}

TEST_CASE("matrix game symmetric payoff is invariant to agent order") {
  const EnvSpec g = hostile_matrix_game();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(matrix::payoff(g, ja({a, b})) == matrix::payoff(g, ja({b, a})));
}

TEST_CASE("matrix game best action equals brute force") {
  for (const EnvSpec& g : {hostile_matrix_game(), cooperative_matrix_game()}) {
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < matrix::joint_action_count(g); ++k) {
      const double v = g.payoff[k];
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    CHECK(matrix::flat_index(g, matrix::best_joint_action(g)) == arg);
    CHECK(matrix::joint_action_at(g, arg) == matrix::best_joint_action(g));
  }
  CHECK(matrix::best_joint_action(hostile_matrix_game()) == ja({0, 0}));
}
