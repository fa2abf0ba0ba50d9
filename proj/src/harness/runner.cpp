#include "macpo/harness/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "macpo/learner/action_selection.hpp"
#include "macpo/replay_buffer.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace macpo {

Episode rollout(Environment& env, const nn::AgentNet& net, double epsilon, Rng& rng, std::ostream* render) {
  const EpisodeShape shape = env.shape();
  Episode ep(shape);
  env.reset(rng);
  std::vector<int> last(static_cast<std::size_t>(shape.n_agents), -1);
  if (render) *render << "t=0\n" << env.render() << '\n';
  for (int t = 0; t < shape.episode_limit; ++t) {
    Transition tr = env.observe();
    tr.action = select_actions(net, tr.obs, last, tr.avail, epsilon, rng);
    auto [reward, terminated] = env.step(tr.action, rng);
    tr.reward = reward;
    tr.terminated = terminated || t + 1 == shape.episode_limit;
    last = tr.action.actions;
    const bool done = tr.terminated;
    ep.push(std::move(tr));
    if (render) *render << "t=" << t + 1 << " reward=" << reward << '\n' << env.render() << '\n';
    if (done) break;
  }
  return ep;
}

double episode_return(const Episode& ep) {
  double r = 0.0;
  for (int t = 0; t < ep.length(); ++t) r += ep.reward(t);
  return r;
}

EvalResult evaluate_policy(const EnvSpec& spec, const nn::AgentNet& net, int episodes, const Rng& rng, bool parallel,
                           std::ostream* render) {
  EvalResult res;
  res.rewards.assign(static_cast<std::size_t>(episodes), 0.0);
  auto run_one = [&](int i) {
    auto env = make_environment(spec);
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    res.rewards[static_cast<std::size_t>(i)] = episode_return(rollout(*env, net, 0.0, r, i == 0 ? render : nullptr));
  };
  if (parallel && !render) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < episodes; ++i) run_one(i);
  } else {
    for (int i = 0; i < episodes; ++i) run_one(i);
  }
  double sum = 0.0;
  for (double r : res.rewards) sum += r;
  res.mean_reward = episodes > 0 ? sum / episodes : 0.0;
  return res;
}

Rng stream_rng(std::uint64_t seed, Stream s) { return Rng(seed, static_cast<std::uint64_t>(s)); }

Learner learner_from_checkpoint(const nn::Checkpoint& ckpt, RunConfig* cfg_out) {
  RunConfig cfg = parse_config(ckpt.config_text);
  Learner l(cfg, episode_shape(cfg.env), stream_rng(cfg.seed, Stream::init));
  l.load_checkpoint(ckpt);
  if (cfg_out) *cfg_out = cfg;
  return l;
}

namespace {

std::string mode_comment(const RunConfig& cfg, bool deterministic) {
  std::ostringstream o;
  o << "mode=" << (deterministic ? "deterministic" : "parallel") << " scheme=" << to_string(cfg.scheme)
    << " seed=" << cfg.seed << " eval_epsilon=0";
  return o.str();
}

}  // namespace

namespace {

std::optional<TrainResult> load_completed(const RunConfig& cfg, const TrainOptions& opt) {
  namespace fs = std::filesystem;
  const fs::path dir = opt.out_dir;
  if (opt.out_dir.empty() || !fs::exists(dir / "checkpoint.bin") || !fs::exists(dir / "metrics.csv")) return std::nullopt;
  try {
    std::ifstream cfg_in(dir / "config.cfg");
    const std::string text((std::istreambuf_iterator<char>(cfg_in)), {});
    if (text != serialize_config(cfg)) return std::nullopt;
    std::ifstream csv(dir / "metrics.csv");
    std::string first;
    std::getline(csv, first);
    const bool det = first.find("mode=deterministic") != std::string::npos;
    if (det != opt.deterministic) return std::nullopt;
    TrainResult res;
    res.rows = read_metrics((dir / "metrics.csv").string());
    if (res.rows.empty() || res.rows.back().env_steps < cfg.t_max) return std::nullopt;
    res.checkpoint = nn::load_checkpoint((dir / "checkpoint.bin").string());
    res.env_steps = res.rows.back().env_steps;
    res.episodes = res.rows.back().episodes;
    res.train_steps = res.rows.back().train_steps;
    res.final_reward = res.rows.back().mean_episode_reward;
    if (opt.log) *opt.log << "reusing finished run in " << opt.out_dir << '\n';
    return res;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

TrainResult run_training(const RunConfig& cfg, const TrainOptions& opt) {
  cfg.validate();
  if (opt.reuse_complete)
    if (auto done = load_completed(cfg, opt)) return *done;
#if defined(__GLIBC__)
  // Batch tensors are tens of MB and reallocated every update; keep them on
  // the heap instead of paying for fresh mmap pages each time.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const auto policy = opt.deterministic ? kernels::ExecPolicy::serial : kernels::ExecPolicy::parallel;
  const EpisodeShape shape = episode_shape(cfg.env);
  auto env = make_environment(cfg.env);
  Learner learner(cfg, shape, stream_rng(cfg.seed, Stream::init), policy);
  ReplayBuffer buffer(shape, static_cast<std::size_t>(cfg.buffer_capacity));
  Rng act_rng = stream_rng(cfg.seed, Stream::rollout);
  Rng sample_rng = stream_rng(cfg.seed, Stream::sample);
  const Rng eval_root = stream_rng(cfg.seed, Stream::eval);

  std::unique_ptr<MetricsWriter> writer;
  std::unique_ptr<std::ofstream> render_out;
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    writer = std::make_unique<MetricsWriter>(opt.out_dir + "/metrics.csv", mode_comment(cfg, opt.deterministic));
    std::ofstream(opt.out_dir + "/config.cfg") << serialize_config(cfg);
    if (opt.render) render_out = std::make_unique<std::ofstream>(opt.out_dir + "/render.txt");
  }

  const auto start = std::chrono::steady_clock::now();
  TrainResult res;
  long next_eval = 0;
  long next_ckpt = cfg.checkpoint_interval > 0 ? cfg.checkpoint_interval : -1;
  long evals = 0;
  double loss_sum = 0.0, raw_mean_sum = 0.0, raw_max = 0.0, entropy_sum = 0.0;
  long stats_count = 0;

  auto checkpoint = [&](const std::string& name) {
    if (opt.out_dir.empty()) return;
    nn::Checkpoint c = learner.to_checkpoint();
    c.episodes = static_cast<std::uint64_t>(res.episodes);
    c.env_steps = static_cast<std::uint64_t>(res.env_steps);
    nn::save_checkpoint(opt.out_dir + "/" + name, c);
  };

  auto eval_point = [&] {
    if (render_out) *render_out << "== eval at env_steps=" << res.env_steps << '\n';
    const EvalResult ev = evaluate_policy(cfg.env, learner.agent(), cfg.eval_episodes,
                                          eval_root.split(static_cast<std::uint64_t>(evals)), !opt.deterministic,
                                          render_out.get());
    ++evals;
    MetricsRow row;
    row.env_steps = res.env_steps;
    row.episodes = res.episodes;
    row.train_steps = learner.train_steps();
    row.mean_episode_reward = ev.mean_reward;
    if (stats_count > 0) {
      row.loss = loss_sum / static_cast<double>(stats_count);
      row.mean_raw_weight = raw_mean_sum / static_cast<double>(stats_count);
      row.max_raw_weight = raw_max;
      row.weight_entropy = entropy_sum / static_cast<double>(stats_count);
    }
    row.epsilon = epsilon_at(res.env_steps, cfg.epsilon_start, cfg.epsilon_finish, cfg.epsilon_anneal_steps);
    row.wall_seconds =
        opt.deterministic ? 0.0 : std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    loss_sum = raw_mean_sum = raw_max = entropy_sum = 0.0;
    stats_count = 0;
    if (writer) writer->write(row);
    if (opt.log)
      *opt.log << "env_steps=" << row.env_steps << " episodes=" << row.episodes << " train_steps=" << row.train_steps
               << " reward=" << row.mean_episode_reward << " loss=" << row.loss << " epsilon=" << row.epsilon
               << std::endl;
    res.rows.push_back(row);
  };

  while (res.env_steps < cfg.t_max) {
    if (res.env_steps >= next_eval) {
      eval_point();
      while (next_eval <= res.env_steps) next_eval += cfg.eval_interval;
    }
    const double eps = epsilon_at(res.env_steps, cfg.epsilon_start, cfg.epsilon_finish, cfg.epsilon_anneal_steps);
    Episode ep = rollout(*env, learner.agent(), eps, act_rng);
    res.env_steps += ep.length();
    ++res.episodes;
    buffer.insert(std::move(ep));

    if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const EpisodeBatch batch = learner.make_batch(buffer.sample(static_cast<std::size_t>(cfg.batch_size), sample_rng));
      const TrainMetrics tm = learner.train_step(batch);
      loss_sum += tm.loss;
      raw_mean_sum += tm.raw_mean;
      raw_max = std::max(raw_max, tm.raw_max);
      entropy_sum += tm.entropy;
      ++stats_count;
    }
    learner.maybe_update_targets(res.episodes);

    if (next_ckpt > 0 && res.env_steps >= next_ckpt) {
      checkpoint("checkpoint_" + std::to_string(res.env_steps) + ".bin");
      while (next_ckpt <= res.env_steps) next_ckpt += cfg.checkpoint_interval;
    }
  }
  eval_point();
  checkpoint("checkpoint.bin");

  res.checkpoint = learner.to_checkpoint();
  res.checkpoint.episodes = static_cast<std::uint64_t>(res.episodes);
  res.checkpoint.env_steps = static_cast<std::uint64_t>(res.env_steps);
  res.train_steps = learner.train_steps();
  res.final_reward = res.rows.back().mean_episode_reward;
  return res;
}

}  // namespace macpo
