#include <doctest.h>

#include <cmath>

#include "macpo/env/environment.hpp"
#include "macpo/harness/presets.hpp"
#include "macpo/harness/runner.hpp"
#include "macpo/learner/action_selection.hpp"
#include "macpo/learner/learner.hpp"
#include "macpo/learner/targets.hpp"

using namespace macpo;

namespace {

std::vector<Episode> matrix_episodes(const EnvSpec& spec, int count, std::uint64_t seed) {
  auto env = make_environment(spec);
  Rng rng(seed);
  std::vector<Episode> out;
  for (int i = 0; i < count; ++i) {
    env->reset(rng);
    Transition t = env->observe();
    t.action.actions = {static_cast<int>(rng.below(static_cast<std::size_t>(spec.matrix_actions))),
                        static_cast<int>(rng.below(static_cast<std::size_t>(spec.matrix_actions)))};
    auto [r, term] = env->step(t.action, rng);
    t.reward = r;
    t.terminated = term;
    Episode ep(env->shape());
    ep.push(t);
    out.push_back(std::move(ep));
  }
  return out;
}

std::vector<const Episode*> pointers(const std::vector<Episode>& eps) {
  std::vector<const Episode*> p;
  for (auto& e : eps) p.push_back(&e);
  return p;
}

void zero(nn::Parameters& p) {
  for (auto& v : p.mutable_values()) v = 0.0;
}

}  // namespace

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_at(0) == 0.995);
  CHECK(epsilon_at(50000) == doctest::Approx(0.5225).epsilon(1e-14));
  CHECK(epsilon_at(100000) == 0.05);
  CHECK(epsilon_at(250000) == 0.05);
}

TEST_CASE("greedy selection breaks ties low and respects masks") {
  CHECK(greedy_action(std::vector<double>{1.0, 3.0, 3.0}, std::vector<std::uint8_t>{1, 1, 1}) == 1);
  CHECK(greedy_action(std::vector<double>{1.0, 3.0, 3.0}, std::vector<std::uint8_t>{1, 0, 1}) == 2);
  CHECK_THROWS_AS(greedy_action(std::vector<double>{1.0}, std::vector<std::uint8_t>{0}), std::invalid_argument);
  Rng rng(1);
  for (int i = 0; i < 100; ++i)
    CHECK(select_action(std::vector<double>{0.0, 5.0, 1.0}, std::vector<std::uint8_t>{1, 1, 1}, 0.0, rng) == 1);
}

TEST_CASE("epsilon one explores uniformly over available actions") {
  nn::AgentNet net(2, 4, 1, 8);
  Rng init(3);
  net.init(init);
  Rng rng(5);
  const std::vector<std::vector<double>> obs{{0.1, 0.2}};
  const std::vector<std::vector<std::uint8_t>> avail{{1, 0, 1, 1}};
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(select_actions(net, obs, {-1}, avail, 1.0, rng)[0])];
  CHECK(counts[1] == 0);
  for (int a : {0, 2, 3}) CHECK(std::abs(counts[static_cast<std::size_t>(a)] / double(draws) - 1.0 / 3) < 0.01);
}

TEST_CASE("td lambda reductions and a hand-unrolled episode") {
  const double g = 0.99;
  const std::vector<double> r{1.0, 2.0, 3.0};
  const std::vector<double> next{0.5, 0.7, 0.9};
  const std::vector<std::uint8_t> term{0, 0, 1}, mask{1, 1, 1};

  auto y0 = td_lambda_targets(r, term, mask, next, 1, 3, g, 0.0);
  CHECK(y0[0] == doctest::Approx(1.0 + g * 0.5).epsilon(1e-15));
  CHECK(y0[1] == doctest::Approx(2.0 + g * 0.7).epsilon(1e-15));
  CHECK(y0[2] == 3.0);

  auto y1 = td_lambda_targets(r, term, mask, next, 1, 3, g, 1.0);
  CHECK(y1[0] == doctest::Approx(1.0 + g * 2.0 + g * g * 3.0).epsilon(1e-15));

  const double lam = 0.6;
  const double h2 = 3.0;
  const double h1 = 2.0 + g * ((1 - lam) * 0.7 + lam * h2);
  const double h0 = 1.0 + g * ((1 - lam) * 0.5 + lam * h1);
  auto y = td_lambda_targets(r, term, mask, next, 1, 3, g, lam);
  CHECK(y[2] == doctest::Approx(h2).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(h1).epsilon(1e-15));
  CHECK(y[0] == doctest::Approx(h0).epsilon(1e-15));

  // truncated, not terminated: the last filled step bootstraps fully
  const std::vector<std::uint8_t> none{0, 0, 0}, two{1, 1, 0};
  auto yt = td_lambda_targets(r, none, two, next, 1, 3, g, lam);
  CHECK(yt[1] == doctest::Approx(2.0 + g * 0.7).epsilon(1e-15));
  CHECK(yt[2] == 0.0);

  std::vector<double> a(3), b(3);
  kernels::serial::td_lambda(r, term, mask, next, 1, 3, g, lam, a);
  kernels::parallel::td_lambda(r, term, mask, next, 1, 3, g, lam, b);
  CHECK(a == b);
}

TEST_CASE("train step at an exact fixed point changes nothing") {
  RunConfig cfg = matrix_game_config();
  cfg.env.payoff.assign(9, 0.0);
  Learner l(cfg, episode_shape(cfg.env), Rng(1));
  zero(l.agent().params());
  zero(l.mixer().params());
  zero(l.central().params());
  l.update_targets();
  const auto eps = matrix_episodes(cfg.env, 8, 2);
  const auto batch = l.make_batch(pointers(eps));
  const std::vector<double> agent(l.agent().params().values().begin(), l.agent().params().values().end());
  const auto g = l.compute_gradients(batch);
  CHECK(g.loss == 0.0);
  for (double x : g.agent) CHECK(x == 0.0);
  for (double x : g.mixer) CHECK(x == 0.0);
  const auto m = l.train_step(batch);
  CHECK(m.loss == 0.0);
  CHECK(m.grad_norm == 0.0);
  CHECK(std::equal(agent.begin(), agent.end(), l.agent().params().values().begin()));
  for (double x : l.mixer().params().values()) CHECK(x == 0.0);
  CHECK(l.train_steps() == 1);
}

TEST_CASE("uniform scheme gives the same gradient as unit weights") {
  RunConfig cfg = matrix_game_config(Scheme::uniform);
  Learner l(cfg, episode_shape(cfg.env), Rng(4));
  const auto eps = matrix_episodes(cfg.env, 16, 9);
  const auto batch = l.make_batch(pointers(eps));
  const std::vector<double> ones(static_cast<std::size_t>(batch.samples()), 1.0);
  const auto a = l.compute_gradients(batch);
  const auto b = l.compute_gradients(batch, std::span<const double>(ones));
  CHECK(a.agent == b.agent);
  CHECK(a.mixer == b.mixer);
  CHECK(a.loss == b.loss);
}

TEST_CASE("weighted loss agrees with the reported loss") {
  RunConfig cfg = matrix_game_config();
  Learner l(cfg, episode_shape(cfg.env), Rng(6));
  const auto eps = matrix_episodes(cfg.env, 16, 10);
  const auto batch = l.make_batch(pointers(eps));
  const auto g = l.compute_gradients(batch);
  CHECK(l.weighted_loss(batch, g.eval.weights.w) == doctest::Approx(g.loss).epsilon(1e-12));
}

TEST_CASE("target networks copy on episode boundaries") {
  RunConfig cfg = matrix_game_config();
  Learner l(cfg, episode_shape(cfg.env), Rng(2));
  auto same = [&] {
    auto eq = [](const nn::Parameters& a, const nn::Parameters& b) {
      return std::equal(a.values().begin(), a.values().end(), b.values().begin());
    };
    return eq(l.agent().params(), l.target_agent().params()) && eq(l.mixer().params(), l.target_mixer().params()) &&
           eq(l.central().params(), l.target_central().params());
  };
  CHECK(same());
  const auto eps = matrix_episodes(cfg.env, 32, 3);
  l.train_step(l.make_batch(pointers(eps)));
  CHECK_FALSE(same());
  CHECK_FALSE(l.maybe_update_targets(199));
  CHECK_FALSE(same());
  CHECK(l.maybe_update_targets(200));
  CHECK(same());
  CHECK_FALSE(l.maybe_update_targets(250));
  CHECK(l.maybe_update_targets(400));
  CHECK(same());
}

TEST_CASE("checkpoint restores a learner exactly") {
  RunConfig cfg = matrix_game_config();
  Learner l(cfg, episode_shape(cfg.env), Rng(2));
  const auto eps = matrix_episodes(cfg.env, 32, 3);
  l.train_step(l.make_batch(pointers(eps)));
  const auto ckpt = l.to_checkpoint();
  RunConfig back;
  Learner r = learner_from_checkpoint(ckpt, &back);
  CHECK(back == cfg);
  CHECK(r.to_checkpoint() == ckpt);
}

TEST_CASE("random-init greedy policy scores at least zero without punishment") {
  const RunConfig cfg = scaled_config(0.0);
  Learner l(cfg, episode_shape(cfg.env), stream_rng(3, Stream::init));
  const auto r = evaluate_policy(cfg.env, l.agent(), 4, Rng(7), false, nullptr);
  CHECK(r.rewards.size() == 4u);
  CHECK(r.mean_reward >= 0.0);
}
