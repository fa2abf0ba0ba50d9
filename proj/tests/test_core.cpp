#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "macpo/config.hpp"
#include "macpo/episode.hpp"
#include "macpo/harness/presets.hpp"
#include "macpo/replay_buffer.hpp"
#include "macpo/rng.hpp"
#include "macpo/serialize.hpp"

using namespace macpo;

namespace {

EpisodeShape tiny_shape() { return EpisodeShape{2, 3, 2, 3, 4}; }

Transition tiny_step(double r, int a0, int a1, bool term = false) {
  Transition t;
  t.state = {r, 1.0, -1.0};
  t.obs = {{0.5, r}, {r, 0.25}};
  t.avail = {{1, 1, 0}, {1, 1, 1}};
  t.action.actions = {a0, a1};
  t.reward = r;
  t.terminated = term;
  return t;
}

Episode tiny_episode(int length, double base) {
  Episode ep(tiny_shape());
  for (int t = 0; t < length; ++t) ep.push(tiny_step(base + t, t % 2, 2 - t % 3, t == length - 1));
  return ep;
}

}  // namespace

TEST_CASE("rng same seed and stream repeat, different streams differ") {
  Rng a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    if (x != c()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("rng split does not advance parent") {
  Rng a(1);
  const auto before = a.counter();
  Rng child = a.split(9);
  CHECK(a.counter() == before);
  CHECK(child() != Rng(1)());
}

TEST_CASE("rng below stays in range and rejects zero") {
  Rng r(2);
  for (int i = 0; i < 10000; ++i) CHECK(r.below(7) < 7u);
  CHECK_THROWS_AS(r.below(0), std::invalid_argument);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("episode padding reads as unfilled zero steps") {
  const Episode ep = tiny_episode(2, 1.0);
  CHECK(ep.length() == 2);
  CHECK(ep.padded_length() == 4);
  CHECK(ep.filled(1));
  CHECK_FALSE(ep.filled(2));
  const Transition pad = ep.step(3);
  CHECK_FALSE(pad.filled);
  CHECK(pad.reward == 0.0);
  for (double s : pad.state) CHECK(s == 0.0);
  CHECK(ep.terminated(1));
  CHECK_NOTHROW(ep.validate());
}

TEST_CASE("episode push rejects malformed steps") {
  Episode ep(tiny_shape());
  auto bad_obs = tiny_step(0, 0, 0);
  bad_obs.obs.pop_back();
  CHECK_THROWS_AS(ep.push(bad_obs), std::invalid_argument);

  auto unavailable = tiny_step(0, 2, 0);  // agent 0 cannot take action 2
  CHECK_THROWS_AS(ep.push(unavailable), std::invalid_argument);

  auto nonfinite = tiny_step(0, 0, 0);
  nonfinite.reward = std::nan("");
  CHECK_THROWS_AS(ep.push(nonfinite), std::invalid_argument);

  ep.push(tiny_step(0, 0, 0, true));
  CHECK_THROWS_AS(ep.push(tiny_step(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("buffer insert and eviction") {
  ReplayBuffer buf(tiny_shape(), 3);
  buf.insert(tiny_episode(1, 0.0));
  CHECK(buf.size() == 1);
  for (int i = 1; i < 5; ++i) buf.insert(tiny_episode(1, i));
  CHECK(buf.size() == 3);
  CHECK(buf.insert_count() == 5);
  std::set<double> kept;
  for (std::size_t i = 0; i < buf.size(); ++i) kept.insert(buf.at(i).reward(0));
  CHECK(kept == std::set<double>{2.0, 3.0, 4.0});
}

TEST_CASE("buffer at capacity 10000 keeps its size") {
  const EpisodeShape shape{1, 1, 1, 1, 1};
  ReplayBuffer buf(shape, 10000);
  auto make = [&](double r) {
    Episode ep(shape);
    Transition t;
    t.state = {r};
    t.obs = {{r}};
    t.avail = {{1}};
    t.action.actions = {0};
    t.reward = r;
    t.terminated = true;
    ep.push(t);
    return ep;
  };
  for (int i = 0; i < 10000; ++i) buf.insert(make(i));
  buf.insert(make(-1.0));
  CHECK(buf.size() == 10000);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf.at(i).reward(0) != 0.0);
}

TEST_CASE("buffer rejects a shape mismatch and empty sampling") {
  ReplayBuffer buf(tiny_shape(), 4);
  Rng rng(1);
  CHECK_THROWS(buf.sample(1, rng));
  Episode other(EpisodeShape{3, 3, 2, 3, 4});
  CHECK_THROWS_AS(buf.insert(other), std::invalid_argument);
}

TEST_CASE("buffer sampling: single episode, reproducible, uniform") {
  ReplayBuffer one(tiny_shape(), 10);
  one.insert(tiny_episode(2, 0.0));
  Rng r(3);
  const auto batch = one.sample(128, r);
  CHECK(batch.size() == 128);
  for (auto* e : batch) CHECK(e == &one.at(0));

  ReplayBuffer buf(tiny_shape(), 10);
  for (int i = 0; i < 10; ++i) buf.insert(tiny_episode(1, i));
  Rng r1(5), r2(5);
  CHECK(buf.sample_indices(128, r1) == buf.sample_indices(128, r2));

  Rng r3(11);
  std::vector<int> counts(10, 0);
  for (auto i : buf.sample_indices(100000, r3)) ++counts[i];
  for (int c : counts) CHECK(std::abs(c / 100000.0 - 0.1) < 0.01);
}

TEST_CASE("episode binary round trip is bit identical") {
  const Episode ep = tiny_episode(3, 0.125);
  const auto bytes = encode_episode(ep);
  const Episode back = decode_episode(bytes);
  CHECK(back == ep);
  CHECK(encode_episode(back) == bytes);

  std::stringstream ss;
  write_episode(ss, ep);
  CHECK(read_episode(ss) == ep);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS(decode_episode(corrupt));
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  CHECK_THROWS(decode_episode(truncated));
}

TEST_CASE("episode header is 16 bytes magic, version, reserved") {
  const auto bytes = encode_episode(tiny_episode(1, 0.0));
  REQUIRE(bytes.size() > 16);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "MACPOEPI");
  CHECK(bytes[8] == kFormatVersion);
  CHECK(bytes[12] == 0);
}

TEST_CASE("transition csv has one row per padded step") {
  std::ostringstream out;
  write_transitions_csv(out, tiny_episode(2, 0.0));
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1 + 4);
}

TEST_CASE("config defaults carry the published hyperparameters") {
  const RunConfig c;
  CHECK(c.batch_size == 128);
  CHECK(c.buffer_capacity == 10000);
  CHECK(c.target_update_interval == 200);
  CHECK(c.learning_rate == 0.001);
  CHECK(c.td_lambda == 0.6);
  CHECK(c.epsilon_start == 0.995);
  CHECK(c.epsilon_finish == 0.05);
  CHECK(c.epsilon_anneal_steps == 100000);
  CHECK(c.thresholds.alpha_high == 0.75);
  CHECK(c.thresholds.alpha_medium == 0.5);
  CHECK(c.thresholds.alpha_low == 0.25);
  CHECK(c.pser_decay == 0.4);
  CHECK(c.pser_window == 5);
  CHECK(c.eval_episodes == 32);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config round trip is canonical for every preset") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = preset(name);
    const std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("shipped config files equal the presets") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = load_config(std::string(MACPO_SOURCE_DIR) + "/configs/" + name + ".cfg");
    CHECK(c == preset(name));
  }
}

TEST_CASE("config errors name the offending key") {
  try {
    parse_config("[learner]\nbogus_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  try {
    parse_config("[learner]\ntd_lambda = abc\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("td_lambda") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[learner]\ngamma = 1.0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[priority]\nscheme = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
}

TEST_CASE("config override applies section.key=value") {
  RunConfig c;
  apply_override(c, "learner.batch_size=16");
  apply_override(c, "priority.scheme=pser");
  CHECK(c.batch_size == 16);
  CHECK(c.scheme == Scheme::pser);
  CHECK_THROWS_AS(apply_override(c, "learner.batch_size"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "learner.nothing=1"), ConfigError);
}

TEST_CASE("scheme names round trip") {
  for (auto s : {Scheme::macpo, Scheme::macpo_approx, Scheme::uniform, Scheme::per, Scheme::discor, Scheme::remern,
                 Scheme::pser})
    CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("prioritized"), std::invalid_argument);
}
