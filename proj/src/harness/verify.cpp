#include "macpo/harness/verify.hpp"

#include "macpo/learner/action_selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "macpo/env/matrix_game.hpp"
#include "macpo/harness/cli.hpp"
#include "macpo/harness/compare.hpp"
#include "macpo/harness/presets.hpp"
#include "macpo/harness/runner.hpp"
#include "macpo/learner/action_selection.hpp"
#include "macpo/priority/formulas.hpp"
#include "macpo/priority/weights.hpp"
#include "macpo/replay_buffer.hpp"
#include "macpo/serialize.hpp"

namespace macpo {

namespace {

using nn::Matrix;

SuiteResult result(bool passed, double measured, double tolerance, std::string detail = {}) {
  SuiteResult r;
  r.passed = passed;
  r.measured = measured;
  r.tolerance = tolerance;
  r.detail = std::move(detail);
  return r;
}

/// Long suites keep their directory so finished training runs are reused.
std::string work_dir(const VerifyOptions& opt, const std::string& suite, bool fresh = true) {
  std::filesystem::path base = opt.work_dir.empty()
                                   ? std::filesystem::temp_directory_path() / "macpo_verify"
                                   : std::filesystem::path(opt.work_dir);
  auto dir = base / suite;
  if (fresh) std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

/// Central differences of loss() against every entry of params.
double max_fd_error(nn::Parameters& params, const std::function<double()>& loss, std::span<const double> analytic,
                    double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double v = params.values()[i];
    params.mutable_values()[i] = v + h;
    const double up = loss();
    params.mutable_values()[i] = v - h;
    const double down = loss();
    params.mutable_values()[i] = v;
    worst = std::max(worst, rel_err(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.normal();
  return m;
}

/// Random-policy episodes cut to random lengths so batches carry padding.
std::vector<Episode> random_episodes(const EnvSpec& spec, int count, std::uint64_t seed) {
  auto env = make_environment(spec);
  const EpisodeShape shape = env->shape();
  nn::AgentNet net(shape.obs_dim, shape.n_actions, shape.n_agents, 16);
  Rng init(seed, 100);
  net.init(init);
  Rng rng(seed, 101);
  std::vector<Episode> out;
  for (int i = 0; i < count; ++i) {
    Episode full = rollout(*env, net, 1.0, rng);
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(full.length())));
    Episode cut(shape);
    for (int t = 0; t < len; ++t) {
      Transition tr = full.step(t);
      tr.terminated = tr.terminated || t + 1 == len;
      cut.push(tr);
    }
    out.push_back(std::move(cut));
  }
  return out;
}

std::vector<const Episode*> pointers(const std::vector<Episode>& eps) {
  std::vector<const Episode*> p;
  for (const auto& e : eps) p.push_back(&e);
  return p;
}

EnvSpec small_pp(double punishment = -1.5) {
  EnvSpec s = scaled_predator_prey(punishment);
  s.episode_limit = 12;
  return s;
}

RunConfig small_learner_config(const EnvSpec& env) {
  RunConfig c;
  c.env = env;
  c.agent_hidden = 16;
  c.mixer_embed = 8;
  c.hypernet_hidden = 16;
  c.central_hidden = 16;
  return c;
}

WeightInputs random_weight_inputs(Rng& rng, bool all_zero_error) {
  WeightInputs in;
  in.episodes = 1 + static_cast<int>(rng.below(6));
  in.time = 1 + static_cast<int>(rng.below(12));
  in.n_agents = 1 + static_cast<int>(rng.below(5));
  const auto S = static_cast<std::size_t>(in.episodes * in.time);
  in.bellman_error.resize(S);
  in.value_gap.resize(S);
  in.filled.assign(S, 0);
  in.probs.resize(S * static_cast<std::size_t>(in.n_agents));
  for (int e = 0; e < in.episodes; ++e) {
    const int len = e == 0 ? 1 + static_cast<int>(rng.below(static_cast<std::size_t>(in.time)))
                           : static_cast<int>(rng.below(static_cast<std::size_t>(in.time) + 1));
    for (int t = 0; t < len; ++t) in.filled[static_cast<std::size_t>(e * in.time + t)] = 1;
  }
  for (std::size_t s = 0; s < S; ++s) {
    const double u = rng.uniform();
    in.bellman_error[s] = all_zero_error || u < 0.1 ? 0.0 : -std::log(1.0 - rng.uniform()) * std::exp(rng.normal());
    in.value_gap[s] = -std::log(1.0 - rng.uniform()) * 2.0;
  }
  for (double& p : in.probs) {
    const double u = rng.uniform();
    p = u < 0.1 ? 0.0 : (u < 0.2 ? 1.0 : rng.uniform());
  }
  return in;
}

/// Pairs that differ by more than tol must be ordered the same way.
bool same_order(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (std::abs(a[i] - a[j]) <= tol || std::abs(b[i] - b[j]) <= tol) continue;
      if ((a[i] < a[j]) != (b[i] < b[j])) return false;
    }
  return true;
}

JointAction greedy_joint(const nn::AgentNet& net, const EnvSpec& spec) {
  auto env = make_environment(spec);
  Rng rng(0, 0);
  env->reset(rng);
  JointAction u;
  for (int a = 0; a < spec.n_agents; ++a) {
    const auto q = net.utilities(env->obs(a), -1, a);
    u.actions.push_back(greedy_action(q, env->avail(a)));
  }
  return u;
}

/// Mean squared error of the unrestricted mixer against every payoff entry,
/// fed the live agents' utilities for each joint action.
double central_fit_loss(const Learner& l, const EnvSpec& spec) {
  double sq = 0.0;
  const std::size_t count = matrix::joint_action_count(spec);
  for (std::size_t k = 0; k < count; ++k) {
    const JointAction u = matrix::joint_action_at(spec, k);
    std::vector<double> q;
    for (int a = 0; a < spec.n_agents; ++a)
      q.push_back(l.agent().utilities(std::vector<double>{1.0}, -1, a)[static_cast<std::size_t>(u[static_cast<std::size_t>(a)])]);
    const double d = l.central().evaluate(std::vector<double>{1.0}, q, u.actions) - spec.payoff[k];
    sq += d * d;
  }
  return sq / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// acceptance suites

SuiteResult suite_fmax(const VerifyOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  double dev = 0.0;
  bool sets_match = true;
  std::ostringstream detail;
  for (int n = 2; n <= 4; ++n) {
    const FmaxResult r = fmax_oracle(n, 0.05, opt.joint_prob);
    dev = std::max(dev, std::abs(r.max_value - 2.0));
    // expected maximizers: one coordinate 0, every other 1
    std::vector<std::vector<double>> expected;
    for (int i = 0; i < n; ++i) {
      std::vector<double> p(static_cast<std::size_t>(n), 1.0);
      p[static_cast<std::size_t>(i)] = 0.0;
      expected.push_back(p);
    }
    auto got = r.maximizers;
    std::ranges::sort(got);
    std::ranges::sort(expected);
    bool match = got.size() == expected.size();
    for (std::size_t k = 0; match && k < got.size(); ++k)
      for (std::size_t j = 0; j < got[k].size(); ++j)
        if (std::abs(got[k][j] - expected[k][j]) > 1e-12) match = false;
    sets_match = sets_match && match;
    detail << "n=" << n << " max=" << std::setprecision(17) << r.max_value << " maximizers=" << r.maximizers.size()
           << (match ? "" : " (set mismatch)") << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail << "runtime " << std::setprecision(3) << secs << "s";
  return result(dev < 1e-12 && sets_match && secs < 60.0, dev, 1e-12, detail.str());
}

SuiteResult suite_closed_form(const VerifyOptions&) {
  double worst = 0.0;
  for (int n : {2, 3, 4, 8})
    for (int k = 0; k <= 10; ++k) {
      const double q = k / 10.0;
      const std::vector<double> p(static_cast<std::size_t>(n), q);
      const double closed = 1.0 + n * std::pow(q, n - 1) - n * std::pow(q, n);
      worst = std::max(worst, std::abs(joint_prob_term(p) - closed));
    }
  return result(worst < 1e-12, worst, 1e-12, "n in {2,3,4,8}, q in {0,0.1,...,1}");
}

SuiteResult suite_gradients(const VerifyOptions&) {
  const auto start = std::chrono::steady_clock::now();
  const EnvSpec spec = scaled_predator_prey(0.0);
  const EpisodeShape shape = episode_shape(spec);
  Rng rng(7, 0);
  double agent_err = 0.0, mixer_err = 0.0, mixer_q_err = 0.0, central_err = 0.0;
  constexpr int kTrials = 10;

  nn::AgentNet agent(shape.obs_dim, shape.n_actions, shape.n_agents, 64);
  nn::MonotonicMixer mixer(shape.state_dim, shape.n_agents, 32, 64);
  nn::UnrestrictedMixer central(shape.state_dim, shape.n_agents, shape.n_actions, 64);
  for (int trial = 0; trial < kTrials; ++trial) {
    agent.init(rng);
    mixer.init(rng);
    central.init(rng);

    {
      const Matrix x = random_matrix(agent.input_dim(), 1, rng);
      const Matrix c = random_matrix(shape.n_actions, 1, rng);
      nn::MlpCache cache;
      agent.forward(x, &cache);
      std::vector<double> g(agent.params().size(), 0.0);
      agent.backward(cache, c, g);
      auto loss = [&] { return (agent.forward(x).array() * c.array()).sum(); };
      agent_err = std::max(agent_err, max_fd_error(agent.params(), loss, g));
    }
    {
      const Matrix s = random_matrix(shape.state_dim, 1, rng);
      Matrix q = random_matrix(shape.n_agents, 1, rng, 2.0);
      const double c = rng.normal();
      nn::MonotonicMixer::Cache cache;
      const Matrix out = mixer.forward(s, q, &cache);
      std::vector<double> g(mixer.params().size(), 0.0);
      const Matrix dq = mixer.backward(cache, Matrix::Constant(1, 1, c), g);
      auto loss = [&] { return c * mixer.forward(s, q)(0, 0); };
      mixer_err = std::max(mixer_err, max_fd_error(mixer.params(), loss, g));
      for (int a = 0; a < shape.n_agents; ++a) {
        const double v = q(a, 0);
        q(a, 0) = v + 1e-5;
        const double up = loss();
        q(a, 0) = v - 1e-5;
        const double down = loss();
        q(a, 0) = v;
        mixer_q_err = std::max(mixer_q_err, rel_err(dq(a, 0), (up - down) / 2e-5));
      }
    }
    {
      Matrix x = Matrix::Zero(central.input_dim(), 1);
      std::vector<double> state(static_cast<std::size_t>(shape.state_dim)), q(static_cast<std::size_t>(shape.n_agents));
      std::vector<int> acts(static_cast<std::size_t>(shape.n_agents));
      for (double& v : state) v = rng.normal();
      for (double& v : q) v = rng.normal();
      for (int& u : acts) u = static_cast<int>(rng.below(static_cast<std::size_t>(shape.n_actions)));
      central.fill_input(x, 0, state, q, acts);
      const double c = rng.normal();
      nn::MlpCache cache;
      central.forward(x, &cache);
      std::vector<double> g(central.params().size(), 0.0);
      central.backward(cache, Matrix::Constant(1, 1, c), g);
      auto loss = [&] { return c * central.forward(x)(0, 0); };
      central_err = std::max(central_err, max_fd_error(central.params(), loss, g));
    }
  }
  const double worst = std::max({agent_err, mixer_err, mixer_q_err, central_err});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << std::setprecision(3) << "agent " << agent_err << ", mixer hypernets " << mixer_err << ", mixer dQ/dq "
    << mixer_q_err << ", unrestricted " << central_err << " over " << kTrials << " inputs each; runtime " << secs
    << "s";
  return result(worst < 1e-4 && secs < 120.0, worst, 1e-4, d.str());
}

SuiteResult suite_monotonicity(const VerifyOptions&) {
  const EnvSpec spec = scaled_predator_prey(0.0);
  const EpisodeShape shape = episode_shape(spec);
  Rng rng(11, 0);
  nn::MonotonicMixer mixer(shape.state_dim, shape.n_agents, 32, 64);
  double lowest = std::numeric_limits<double>::infinity();
  constexpr int kProbes = 1000;
  for (int probe = 0; probe < kProbes; ++probe) {
    if (probe % 100 == 0) mixer.init(rng);
    std::vector<double> s(static_cast<std::size_t>(shape.state_dim)), q(static_cast<std::size_t>(shape.n_agents));
    for (double& v : s) v = rng.uniform() < 0.5 ? 0.0 : rng.normal();
    for (double& v : q) v = 5.0 * rng.normal();
    for (std::size_t a = 0; a < q.size(); ++a) {
      const double v = q[a];
      q[a] = v + 1e-5;
      const double up = mixer.mix(s, q);
      q[a] = v - 1e-5;
      const double down = mixer.mix(s, q);
      q[a] = v;
      lowest = std::min(lowest, (up - down) / 2e-5);
    }
  }
  return result(lowest >= -1e-8, lowest, -1e-8, "min numeric dQ_tot/dQ^a over 1000 probes");
}

SuiteResult suite_weight_contracts(const VerifyOptions&) {
  Rng rng(13, 0);
  double worst_mean = 0.0;
  bool ok = true;
  std::string why;
  const Scheme schemes[] = {Scheme::macpo, Scheme::macpo_approx, Scheme::uniform, Scheme::per,
                            Scheme::discor, Scheme::remern,      Scheme::pser};
  for (int b = 0; b < 100; ++b) {
    const WeightInputs in = random_weight_inputs(rng, b == 0);
    std::size_t filled = 0;
    for (auto f : in.filled) filled += f;
    for (Scheme s : schemes) {
      const PriorityWeights w = compute_weights(s, in);
      double sum = 0.0;
      for (std::size_t k = 0; k < w.w.size(); ++k) {
        if (!(w.w[k] >= 0.0) || !std::isfinite(w.w[k])) {
          ok = false;
          why = to_string(s) + ": negative or nonfinite weight";
        }
        if (!in.filled[k] && w.w[k] != 0.0) {
          ok = false;
          why = to_string(s) + ": masked weight not zero";
        }
        if (in.filled[k]) sum += w.w[k];
      }
      worst_mean = std::max(worst_mean, std::abs(sum / static_cast<double>(filled) - 1.0));
    }
    const PriorityWeights base = macpo_exact(in);
    for (double c : {0.25, 3.7, 1024.0}) {
      WeightInputs scaled = in;
      for (double& e : scaled.bellman_error) e *= c;
      const PriorityWeights w = macpo_exact(scaled);
      if (!same_order(base.w, w.w, 1e-9)) {
        ok = false;
        why = "macpo rank order changed under scaling by " + std::to_string(c);
      }
    }
  }
  ok = ok && worst_mean <= 1e-9;
  return result(ok, worst_mean, 1e-9, why.empty() ? "7 schemes x 100 batches; max |mean-1| shown" : why);
}

SuiteResult suite_sampling_equivalence(const VerifyOptions&) {
  constexpr int kSamples = 16;
  constexpr int kDraws = 100000;
  Rng rng(17, 0);
  nn::Mlp mlp({3, 8, 1}, {nn::Activation::elu, nn::Activation::identity});
  nn::Parameters params(mlp.param_count());
  mlp.init(params.mutable_values(), rng);
  const Matrix x = random_matrix(3, kSamples, rng);
  const Matrix y = random_matrix(1, kSamples, rng);

  // per-sample gradients of the unweighted squared error
  std::vector<std::vector<double>> grads;
  WeightInputs in;
  in.n_agents = 3;
  for (int k = 0; k < kSamples; ++k) {
    nn::MlpCache cache;
    const Matrix out = mlp.forward(nn::ParamView::of(params), x.col(k), &cache);
    const double d = out(0, 0) - y(0, k);
    std::vector<double> g(params.size(), 0.0);
    mlp.backward(nn::ParamView::of(params), cache, Matrix::Constant(1, 1, 2.0 * d), g);
    grads.push_back(std::move(g));
    in.bellman_error.push_back(std::abs(d));
    in.value_gap.push_back(std::abs(rng.normal()));
    for (int a = 0; a < 3; ++a) in.probs.push_back(rng.uniform());
    in.filled.push_back(1);
  }
  const PriorityWeights w = macpo_exact(in);

  const std::size_t P = params.size();
  std::vector<double> exact(P, 0.0), mc(P, 0.0), cdf;
  double total = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    for (std::size_t i = 0; i < P; ++i) exact[i] += w.w[static_cast<std::size_t>(k)] * grads[static_cast<std::size_t>(k)][i] / kSamples;
    total += w.w[static_cast<std::size_t>(k)];
    cdf.push_back(total);
  }
  for (int draw = 0; draw < kDraws; ++draw) {
    const double u = rng.uniform() * total;
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, cdf.size() - 1);
    for (std::size_t i = 0; i < P; ++i) mc[i] += grads[k][i] / kDraws;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    num += (mc[i] - exact[i]) * (mc[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  const double rel = std::sqrt(num / den);
  return result(rel < 0.02, rel, 0.02, "||E_mc[grad] - weighted grad|| / ||weighted grad||, 1e5 draws");
}

SuiteResult suite_matrix_game(const VerifyOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig base = matrix_game_config(Scheme::macpo);
  const JointAction best = matrix::best_joint_action(base.env);
  int hits = 0;
  double worst_fit = 0.0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = base;
    cfg.seed = seed;
    const TrainResult r = run_training(cfg);
    const Learner l = learner_from_checkpoint(r.checkpoint);
    const JointAction g = greedy_joint(l.agent(), cfg.env);
    const double fit = central_fit_loss(l, cfg.env);
    worst_fit = std::max(worst_fit, fit);
    hits += (g == best) && r.train_steps <= 2000;
    d << "seed " << seed << ": (" << g[0] << "," << g[1] << ") fit " << std::setprecision(3) << fit << "; ";
    if (opt.log) *opt.log << "  matrix game seed " << seed << " greedy (" << g[0] << "," << g[1] << ")\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  d << "optimum (" << best[0] << "," << best[1] << "), runtime " << std::setprecision(3) << secs << "s";
  return result(hits == 5 && worst_fit < 1e-3 && secs < 300.0, hits, 5, d.str());
}

SuiteResult suite_pp_capture(const VerifyOptions& opt) {
  const std::string dir = work_dir(opt, "pp_capture", false);
  int reached = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RunConfig cfg = scaled_config(0.0, Scheme::macpo);
    cfg.seed = seed;
    TrainOptions t;
    t.out_dir = dir + "/seed" + std::to_string(seed);
    t.deterministic = true;
    t.log = opt.log;
    t.reuse_complete = true;
    const TrainResult r = run_training(cfg, t);
    double best = -1e300;
    long at = 0;
    for (const auto& row : r.rows)
      if (row.mean_episode_reward > best) {
        best = row.mean_episode_reward;
        at = row.env_steps;
      }
    reached += best >= 15.0;
    d << "seed " << seed << ": best " << std::setprecision(4) << best << " at " << at << " steps; ";
  }
  d << "runs in " << dir;
  return result(reached >= 2, reached, 2, d.str());
}

SuiteResult suite_pp_punishment(const VerifyOptions& opt) {
  const std::string dir = work_dir(opt, "pp_punishment", false);
  TrainOptions t;
  t.out_dir = dir;
  t.deterministic = true;
  t.log = opt.log;
  t.reuse_complete = true;
  const CompareResult r = run_compare(scaled_config(-1.5), {Scheme::macpo, Scheme::uniform}, {1, 2, 3}, t);
  std::ostringstream table;
  print_compare_table(table, r);
  std::ofstream(dir + "/table.txt") << table.str();
  const double gap = r.rows[0].mean - r.rows[1].mean;
  std::ostringstream d;
  d << std::setprecision(4) << "macpo " << r.rows[0].mean << " +- " << r.rows[0].stddev << ", uniform " << r.rows[1].mean
    << " +- " << r.rows[1].stddev << "; runs in " << dir;
  return result(gap >= 2.0 && r.rows[0].mean > r.rows[1].mean, gap, 2.0, d.str());
}

SuiteResult suite_determinism(const VerifyOptions& opt) {
  const std::string dir = work_dir(opt, "determinism");
  auto train = [&](const std::string& out) {
    std::ostringstream o, e;
    const int code = cli::run({"train", "--preset", "scaled_p-1.5", "--set", "run.t_max=3000", "--set",
                               "learner.batch_size=8", "--set", "run.eval_interval=1000", "--set",
                               "run.eval_episodes=4", "--seed", "5", "--deterministic", "--quiet", "--out", out},
                              o, e);
    if (code != 0) throw std::runtime_error("train failed: " + e.str());
  };
  train(dir + "/a");
  train(dir + "/b");
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(dir + "/a/metrics.csv"), b = slurp(dir + "/b/metrics.csv");
  const bool same = !a.empty() && a == b;
  return result(same, same ? 0.0 : 1.0, 0.0,
                std::to_string(std::count(a.begin(), a.end(), '\n')) + " CSV lines, byte comparison");
}

// ---------------------------------------------------------------------------
// invariant suites

SuiteResult suite_episode_roundtrip(const VerifyOptions&) {
  const auto eps = random_episodes(small_pp(), 20, 3);
  int bad = 0;
  for (const auto& e : eps) {
    const auto bytes = encode_episode(e);
    const Episode back = decode_episode(bytes);
    bad += !(back == e) || encode_episode(back) != bytes;
  }
  return result(bad == 0, bad, 0, "encode/decode of 20 episodes");
}

SuiteResult suite_buffer_uniformity(const VerifyOptions&) {
  const auto eps = random_episodes(small_pp(), 20, 5);
  ReplayBuffer buf(eps.front().shape(), 20);
  for (const auto& e : eps) buf.insert(e);
  Rng rng(19, 0);
  std::vector<double> counts(20, 0.0);
  constexpr int kDraws = 100000;
  for (std::size_t i : buf.sample_indices(kDraws, rng)) counts[i] += 1.0;
  double chi2 = 0.0;
  const double expect = kDraws / 20.0;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 99th percentile of chi-square with 19 degrees of freedom
  constexpr double kCritical = 36.1909;
  return result(chi2 < kCritical, chi2, kCritical, "chi-square, 1e5 draws over 20 episodes");
}

SuiteResult suite_padding_neutrality(const VerifyOptions&) {
  const EnvSpec spec = small_pp();
  const RunConfig cfg = small_learner_config(spec);
  const auto eps = random_episodes(spec, 8, 7);
  Learner l(cfg, episode_shape(spec), Rng(3, 0));
  const EpisodeBatch clean = l.make_batch(pointers(eps));
  EpisodeBatch dirty = clean;
  Rng rng(23, 0);
  const auto n = static_cast<std::size_t>(dirty.n_agents);
  const auto m = static_cast<std::size_t>(dirty.n_actions);
  for (std::size_t s = 0; s < dirty.mask.size(); ++s) {
    if (dirty.mask[s]) continue;
    dirty.rewards[s] = 100.0 * rng.normal();
    dirty.terminated[s] = static_cast<std::uint8_t>(rng.below(2));
    for (Eigen::Index d = 0; d < dirty.states.rows(); ++d) dirty.states(d, static_cast<Eigen::Index>(s)) = rng.normal();
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t col = s * n + a;
      for (Eigen::Index d = 0; d < dirty.agent_inputs.rows(); ++d)
        dirty.agent_inputs(d, static_cast<Eigen::Index>(col)) = rng.normal();
      dirty.actions[col] = static_cast<int>(rng.below(m));
      for (std::size_t k = 0; k < m; ++k) dirty.avail[col * m + k] = static_cast<std::uint8_t>(rng.below(2));
      dirty.avail[col * m + static_cast<std::size_t>(dirty.actions[col])] = 1;
    }
  }
  const Gradients a = l.compute_gradients(clean);
  const Gradients b = l.compute_gradients(dirty);
  const bool same = a.loss == b.loss && a.central_loss == b.central_loss && a.agent == b.agent && a.mixer == b.mixer &&
                    a.central == b.central && a.eval.weights.w == b.eval.weights.w;
  return result(same, same ? 0.0 : 1.0, 0.0, "loss, weights and gradients with padded payloads randomized");
}

SuiteResult suite_env_invariants(const VerifyOptions&) {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  Rng rng(29, 0);
  long steps = 0, violations = 0, captures = 0;
  for (int episode = 0; episode < 200; ++episode) {
    pp::State s = pp::reset(spec, rng);
    while (!s.done) {
      JointAction u;
      for (int a = 0; a < spec.n_agents; ++a) {
        const auto av = pp::avail_actions(s, a);
        std::vector<int> ok;
        for (int k = 0; k < pp::kNumActions; ++k)
          if (av[static_cast<std::size_t>(k)]) ok.push_back(k);
        // lean on catch so captures actually happen
        const bool can_catch = av[pp::kCatch] != 0;
        u.actions.push_back(can_catch && rng.uniform() < 0.5 ? int(pp::kCatch) : ok[rng.below(ok.size())]);
      }
      const pp::StepResult r = pp::step(spec, s, u, rng);
      const int pred_lost = pp::live_predators(s) - pp::live_predators(r.next);
      const int prey_lost = pp::live_prey(s) - pp::live_prey(r.next);
      violations += pred_lost != 2 * r.captures || prey_lost != r.captures || prey_lost < 0;
      violations += r.reward != spec.capture_reward * r.captures + spec.punishment * r.lone_attempts;
      captures += r.captures;
      s = r.next;
      ++steps;
    }
  }
  return result(violations == 0 && captures > 0, static_cast<double>(violations), 0.0,
                std::to_string(steps) + " steps, " + std::to_string(captures) + " captures");
}

SuiteResult suite_obs_locality(const VerifyOptions&) {
  const EnvSpec spec = scaled_predator_prey(0.0);
  Rng rng(31, 0);
  const int half = spec.obs_size / 2;
  int checked = 0, violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    pp::State s = pp::reset(spec, rng);
    const int agent = static_cast<int>(rng.below(static_cast<std::size_t>(spec.n_agents)));
    const pp::Cell me = *s.predators[static_cast<std::size_t>(agent)];
    auto outside = [&](pp::Cell c) { return std::abs(c.row - me.row) > half || std::abs(c.col - me.col) > half; };
    // move one outside entity to another free outside cell
    std::vector<std::optional<pp::Cell>*> movable;
    for (auto& p : s.prey)
      if (p && outside(*p)) movable.push_back(&p);
    for (std::size_t i = 0; i < s.predators.size(); ++i)
      if (static_cast<int>(i) != agent && s.predators[i] && outside(*s.predators[i])) movable.push_back(&s.predators[i]);
    if (movable.empty()) continue;
    std::vector<pp::Cell> free_cells;
    for (int r = 0; r < s.grid_h; ++r)
      for (int c = 0; c < s.grid_w; ++c)
        if (outside({r, c}) && !pp::occupied(s, {r, c})) free_cells.push_back({r, c});
    if (free_cells.empty()) continue;
    const auto before = pp::observe(spec, s, agent);
    **movable[rng.below(movable.size())] = free_cells[rng.below(free_cells.size())];
    violations += pp::observe(spec, s, agent) != before;
    ++checked;
  }
  return result(violations == 0 && checked > 100, violations, 0, std::to_string(checked) + " perturbations");
}

SuiteResult suite_env_determinism(const VerifyOptions&) {
  const EnvSpec spec = scaled_predator_prey(-1.5);
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng act(seed, 77);
    std::vector<pp::State> first;
    for (int pass = 0; pass < 2; ++pass) {
      Rng env_rng(seed, 1);
      Rng a = act;
      pp::State s = pp::reset(spec, env_rng);
      std::vector<pp::State> traj{s};
      while (!s.done) {
        JointAction u;
        for (int k = 0; k < spec.n_agents; ++k) {
          const auto av = pp::avail_actions(s, k);
          int pick;
          do pick = static_cast<int>(a.below(pp::kNumActions));
          while (!av[static_cast<std::size_t>(pick)]);
          u.actions.push_back(pick);
        }
        s = pp::step(spec, s, u, env_rng).next;
        traj.push_back(s);
      }
      if (pass == 0)
        first = traj;
      else
        mismatches += traj != first;
    }
  }
  return result(mismatches == 0, mismatches, 0, "20 seeds replayed twice");
}

SuiteResult suite_kernel_parity(const VerifyOptions&) {
  Rng rng(37, 0);
  const int n = 4, E = 8, N = 257, m = 6;
  const Matrix h1 = random_matrix(n * E, N, rng), b1 = random_matrix(E, N, rng), h2 = random_matrix(E, N, rng),
               v = random_matrix(1, N, rng), q = random_matrix(n, N, rng), d = random_matrix(1, N, rng);
  const kernels::MixInputs in{h1, b1, h2, v, q};
  Matrix zs, qs, zp, qp;
  kernels::serial::mix_forward(in, zs, qs);
  kernels::parallel::mix_forward(in, zp, qp);
  kernels::MixGrads gs, gp;
  kernels::serial::mix_backward(in, zs, d, gs);
  kernels::parallel::mix_backward(in, zp, d, gp);
  bool same = zs == zp && qs == qp && gs.h1 == gp.h1 && gs.b1 == gp.b1 && gs.h2 == gp.h2 && gs.v == gp.v && gs.q == gp.q;

  const Matrix u = random_matrix(m, N * n, rng);
  std::vector<std::uint8_t> avail(static_cast<std::size_t>(N * n * m), 1);
  std::vector<int> acts(static_cast<std::size_t>(N * n));
  for (int& a : acts) a = static_cast<int>(rng.below(m));
  std::vector<double> ps(acts.size()), pp_(acts.size());
  kernels::serial::taken_action_probs(u, avail, acts, n, ps);
  kernels::parallel::taken_action_probs(u, avail, acts, n, pp_);
  same = same && ps == pp_;

  std::vector<double> err(static_cast<std::size_t>(N)), gap(err.size()), out_s(err.size()), out_p(err.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    err[i] = std::abs(rng.normal());
    gap[i] = std::abs(rng.normal());
  }
  kernels::serial::raw_macpo_exact(err, gap, ps, n, out_s);
  kernels::parallel::raw_macpo_exact(err, gap, ps, n, out_p);
  same = same && out_s == out_p;
  kernels::serial::raw_macpo_approx(err, gap, ps, n, ApproxThresholds{}, out_s);
  kernels::parallel::raw_macpo_approx(err, gap, ps, n, ApproxThresholds{}, out_p);
  same = same && out_s == out_p;

  const int B = 16, T = 17;
  std::vector<double> r(static_cast<std::size_t>(B * T)), nv(r.size()), ys(r.size()), yp(r.size());
  std::vector<std::uint8_t> term(r.size(), 0), mask(r.size(), 0);
  for (int b = 0; b < B; ++b) {
    const int len = 1 + static_cast<int>(rng.below(T));
    for (int t = 0; t < len; ++t) {
      const auto k = static_cast<std::size_t>(b * T + t);
      mask[k] = 1;
      r[k] = rng.normal();
      nv[k] = rng.normal();
      term[k] = t + 1 == len && rng.uniform() < 0.7;
    }
  }
  kernels::serial::td_lambda(r, term, mask, nv, B, T, 0.99, 0.6, ys);
  kernels::parallel::td_lambda(r, term, mask, nv, B, T, 0.99, 0.6, yp);
  same = same && ys == yp;
  return result(same, same ? 0.0 : 1.0, 0.0, "serial vs OpenMP kernels, bitwise");
}

SuiteResult suite_param_determinism(const VerifyOptions&) {
  const EnvSpec spec = small_pp();
  const RunConfig cfg = small_learner_config(spec);
  const auto eps = random_episodes(spec, 6, 9);
  auto train = [&](kernels::ExecPolicy policy) {
    Learner l(cfg, episode_shape(spec), Rng(4, 0), policy);
    const EpisodeBatch batch = l.make_batch(pointers(eps));
    for (int i = 0; i < 5; ++i) l.train_step(batch);
    std::vector<double> all;
    for (const nn::Parameters* p : {&l.agent().params(), &l.mixer().params(), &l.central().params()})
      all.insert(all.end(), p->values().begin(), p->values().end());
    return all;
  };
  const auto a = train(kernels::ExecPolicy::serial);
  const auto b = train(kernels::ExecPolicy::serial);
  const auto c = train(kernels::ExecPolicy::parallel);
  const bool same = a == b && a == c;
  return result(same, same ? 0.0 : 1.0, 0.0, "parameters after 5 updates: two serial runs and one OpenMP run");
}

SuiteResult suite_rank_monotonicity(const VerifyOptions&) {
  Rng rng(41, 0);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    WeightInputs in = random_weight_inputs(rng, false);
    std::vector<std::size_t> filled;
    for (std::size_t k = 0; k < in.filled.size(); ++k)
      if (in.filled[k]) filled.push_back(k);
    const std::size_t k = filled[rng.below(filled.size())];
    auto rank = [&](const PriorityWeights& w) {
      std::size_t below = 0;
      for (std::size_t j : filled) below += w.w[j] < w.w[k];
      return below;
    };
    const std::size_t before = rank(macpo_exact(in));
    in.bellman_error[k] = in.bellman_error[k] * (1.0 + 3.0 * rng.uniform()) + 0.01;
    violations += rank(macpo_exact(in)) < before;
  }
  return result(violations == 0, violations, 0, "200 single-sample error increases");
}

Learner matrix_learner(const EnvSpec& spec, std::uint64_t seed) {
  RunConfig cfg;
  cfg.env = spec;
  cfg.agent_hidden = 16;
  cfg.mixer_embed = 8;
  cfg.hypernet_hidden = 16;
  cfg.central_hidden = 16;
  return Learner(cfg, episode_shape(spec), Rng(seed, 0));
}

/// Every joint action of a matrix game as a one-step episode.
std::vector<Episode> enumerated_episodes(const EnvSpec& spec) {
  std::vector<Episode> out;
  MatrixGameEnv env(spec);
  Rng rng(0, 0);
  for (std::size_t k = 0; k < matrix::joint_action_count(spec); ++k) {
    env.reset(rng);
    Transition tr = env.observe();
    tr.action = matrix::joint_action_at(spec, k);
    tr.reward = env.step(tr.action, rng).first;
    tr.terminated = true;
    Episode e(env.shape());
    e.push(tr);
    out.push_back(std::move(e));
  }
  return out;
}

SuiteResult suite_learner_fd(const VerifyOptions&) {
  const EnvSpec spec = hostile_matrix_game();
  Learner l = matrix_learner(spec, 5);
  const auto eps = enumerated_episodes(spec);
  const EpisodeBatch batch = l.make_batch(pointers(eps));
  Rng rng(43, 0);
  std::vector<double> w(static_cast<std::size_t>(batch.samples()));
  for (double& x : w) x = 0.1 + rng.uniform();
  const Gradients g = l.compute_gradients(batch, w);
  auto loss = [&] { return l.weighted_loss(batch, w); };
  const double agent = max_fd_error(l.agent().params(), loss, g.agent);
  const double mixer = max_fd_error(l.mixer().params(), loss, g.mixer);
  auto closs = [&] { return l.central_loss(batch); };
  const double central = max_fd_error(l.central().params(), closs, g.central);
  const double worst = std::max({agent, mixer, central});
  std::ostringstream d;
  d << std::setprecision(3) << "agent " << agent << ", mixer " << mixer << ", unrestricted " << central;
  return result(worst < 1e-4, worst, 1e-4, d.str());
}

SuiteResult suite_unit_weights(const VerifyOptions&) {
  const EnvSpec spec = small_pp();
  RunConfig cfg = small_learner_config(spec);
  cfg.scheme = Scheme::uniform;
  const auto eps = random_episodes(spec, 6, 11);
  Learner l(cfg, episode_shape(spec), Rng(6, 0));
  const EpisodeBatch batch = l.make_batch(pointers(eps));
  const std::vector<double> ones(static_cast<std::size_t>(batch.samples()), 1.0);
  const Gradients a = l.compute_gradients(batch, ones);
  const Gradients b = l.compute_gradients(batch);
  const bool same = a.agent == b.agent && a.mixer == b.mixer && a.loss == b.loss;
  return result(same, same ? 0.0 : 1.0, 0.0, "all-ones weights vs uniform scheme, bitwise");
}

SuiteResult suite_weights_constant(const VerifyOptions&) {
  const EnvSpec spec = small_pp();
  const RunConfig cfg = small_learner_config(spec);
  const auto eps = random_episodes(spec, 6, 13);
  Learner l(cfg, episode_shape(spec), Rng(8, 0));
  const EpisodeBatch batch = l.make_batch(pointers(eps));
  const Gradients first = l.compute_gradients(batch);
  const std::vector<double> fixed = first.eval.weights.w;
  const Gradients a = l.compute_gradients(batch, fixed);
  // The unrestricted mixer only reaches the agent/mixer loss through the
  // weights; moving it must not move their gradients.
  Rng rng(47, 0);
  for (double& x : l.central().params().mutable_values()) x += 0.5 * rng.normal();
  const Gradients b = l.compute_gradients(batch, fixed);
  const bool weights_moved = b.eval.weights.w != a.eval.weights.w;
  const bool same = a.agent == b.agent && a.mixer == b.mixer && a.loss == b.loss;
  return result(same && weights_moved, same ? 0.0 : 1.0, 0.0,
                weights_moved ? "agent/mixer gradients unchanged while scheme weights moved"
                              : "perturbation did not move the weights");
}

SuiteResult suite_cooperative_2x2(const VerifyOptions&) {
  const RunConfig base = cooperative_2x2_config(Scheme::macpo);
  const JointAction best = matrix::best_joint_action(base.env);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = base;
    cfg.seed = seed;
    const TrainResult r = run_training(cfg);
    hits += greedy_joint(learner_from_checkpoint(r.checkpoint).agent(), cfg.env) == best;
  }
  return result(hits == 5, hits, 5, "seeds with greedy joint action at the optimum after 2000 updates");
}

SuiteResult suite_config_roundtrip(const VerifyOptions&) {
  int bad = 0;
  for (const auto& name : preset_names()) {
    const RunConfig c = preset(name);
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    bad += !(back == c) || serialize_config(back) != text;
  }
  return result(bad == 0, bad, 0, "every preset through serialize/parse");
}

SuiteResult suite_csv_schema(const VerifyOptions& opt) {
  const std::string dir = work_dir(opt, "csv_schema");
  RunConfig cfg = scaled_config(-1.5);
  cfg.t_max = 1500;
  cfg.batch_size = 4;
  cfg.eval_interval = 500;
  cfg.eval_episodes = 2;
  TrainOptions t;
  t.out_dir = dir;
  t.deterministic = true;
  run_training(cfg, t);
  std::ifstream in(dir + "/metrics.csv");
  std::string comment, header;
  std::getline(in, comment);
  std::getline(in, header);
  std::string expected;
  for (const auto& c : metrics_columns()) expected += (expected.empty() ? "" : ",") + c;
  const auto rows = read_metrics(dir + "/metrics.csv");  // throws on nonfinite fields
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].env_steps >= rows[i - 1].env_steps;
  const bool ok = comment.starts_with("# mode=") && header == expected && rows.size() >= 3 && monotone;
  return result(ok, static_cast<double>(rows.size()), 3, "header, finite fields, monotone env_steps");
}

std::vector<Suite> make_suites() {
  return {
      {"fmax", "joint probability term maximum on a 0.05 grid, n = 2..4", 1, false, suite_fmax},
      {"closed_form_f", "joint probability term vs closed form at equal probabilities", 2, false, suite_closed_form},
      {"gradients", "finite-difference checks of every trainable block", 3, false, suite_gradients},
      {"monotonicity", "numeric dQ_tot/dQ^a >= 0 over random probes", 4, false, suite_monotonicity},
      {"weight_contracts", "nonnegative, masked, mean-one weights; scale-invariant ranking", 5, false,
       suite_weight_contracts},
      {"sampling_equivalence", "weighted loss vs weight-proportional sampling gradient", 6, false,
       suite_sampling_equivalence},
      {"matrix_game", "hostile 3x3 game: greedy optimum and unrestricted fit", 7, false, suite_matrix_game},
      {"pp_capture", "scaled predator-prey p=0 reaches reward 15", 8, true, suite_pp_capture},
      {"pp_punishment", "scaled predator-prey p=-1.5, macpo vs uniform", 9, true, suite_pp_punishment},
      {"determinism", "two deterministic train runs give byte-identical CSVs", 10, false, suite_determinism},
      {"episode_roundtrip", "episode serialization is bit-identical", 0, false, suite_episode_roundtrip},
      {"buffer_uniformity", "replay sampling passes a chi-square test", 0, false, suite_buffer_uniformity},
      {"padding_neutrality", "padded steps do not affect loss, weights or gradients", 0, false,
       suite_padding_neutrality},
      {"env_invariants", "conservation and reward decomposition", 0, false, suite_env_invariants},
      {"obs_locality", "observations ignore cells outside the window", 0, false, suite_obs_locality},
      {"env_determinism", "seed and actions fix the trajectory", 0, false, suite_env_determinism},
      {"kernel_parity", "serial and OpenMP kernels agree bitwise", 0, false, suite_kernel_parity},
      {"param_determinism", "identical seeds give identical parameters", 0, false, suite_param_determinism},
      {"rank_monotonicity", "larger Bellman error never lowers a sample's rank", 0, false,
       suite_rank_monotonicity},
      {"learner_fd", "train-step gradient vs finite differences of the weighted loss", 0, false, suite_learner_fd},
      {"unit_weights", "all-ones weights equal the unweighted gradient", 0, false, suite_unit_weights},
      {"weights_constant", "no gradient flows through the weights", 0, false, suite_weights_constant},
      {"cooperative_2x2", "2x2 cooperative game reaches the optimum", 0, false, suite_cooperative_2x2},
      {"config_roundtrip", "configs survive serialize/parse", 0, false, suite_config_roundtrip},
      {"csv_schema", "metrics CSV header and finite fields", 0, false, suite_csv_schema},
  };
}

}  // namespace

bool VerifyReport::passed() const {
  return std::ranges::all_of(suites, [](const SuiteResult& r) { return r.passed; });
}

const std::vector<Suite>& verify_suites() {
  static const std::vector<Suite> suites = make_suites();
  return suites;
}

const Suite& find_suite(const std::string& name) {
  for (const auto& s : verify_suites())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown verify suite '" + name + "'");
}

bool suite_selected(const Suite& s, const VerifyOptions& opt) {
  if (opt.filter.empty()) return !s.long_running || opt.include_long;
  std::stringstream ss(opt.filter);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty() && s.name.find(tok) != std::string::npos) return true;
  return false;
}

SuiteResult run_suite(const Suite& s, const VerifyOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = s.run(opt);
  } catch (const std::exception& e) {
    r = result(false, std::nan(""), 0.0, std::string("threw: ") + e.what());
  }
  r.name = s.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;
  for (const auto& s : verify_suites())
    if (suite_selected(s, opt)) rep.suites.push_back(run_suite(s, opt));
  return rep;
}

void print_suite_line(std::ostream& out, const SuiteResult& r, int criterion) {
  out << (r.passed ? "PASS" : "FAIL") << "  ";
  if (criterion > 0) out << "criterion " << std::setw(2) << criterion << "  ";
  out << std::left << std::setw(22) << r.name << std::right << " measured=" << std::setprecision(6) << r.measured
      << " tolerance=" << r.tolerance << " (" << std::fixed << std::setprecision(1) << r.seconds << "s)"
      << std::defaultfloat << "  " << r.detail << '\n';
}

}  // namespace macpo
