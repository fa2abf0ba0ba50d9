#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "macpo/config.hpp"
#include "macpo/env/environment.hpp"
#include "macpo/harness/metrics.hpp"
#include "macpo/learner/learner.hpp"

namespace macpo {

/// Plays one episode with epsilon-greedy actions. If render is set, every
/// frame is written to it.
Episode rollout(Environment& env, const nn::AgentNet& net, double epsilon, Rng& rng, std::ostream* render = nullptr);

double episode_return(const Episode& ep);

struct EvalResult {
  double mean_reward = 0.0;
  std::vector<double> rewards;
};

/// Greedy (epsilon = 0) evaluation. Episode i uses rng.split(i), so the
/// result does not depend on how episodes are scheduled.
EvalResult evaluate_policy(const EnvSpec& env, const nn::AgentNet& net, int episodes, const Rng& rng,
                           bool parallel = false, std::ostream* render = nullptr);

struct TrainOptions {
  std::string out_dir;  // empty: no files written
  bool deterministic = true;
  bool render = false;  // dump the first eval episode of each eval point
  std::ostream* log = nullptr;
  /// If out_dir already holds a finished run of the same config and mode
  /// (config.cfg, metrics.csv up to t_max, checkpoint.bin), load it instead
  /// of training again.
  bool reuse_complete = false;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  long env_steps = 0;
  long episodes = 0;
  long train_steps = 0;
  double final_reward = 0.0;
  nn::Checkpoint checkpoint;  // final learner state
};

/// Named generator streams derived from the run seed.
enum class Stream : std::uint64_t { init = 1, rollout = 2, sample = 3, eval = 4, final_eval = 5 };
Rng stream_rng(std::uint64_t seed, Stream s);

/// Full training loop: rollouts, buffer, one train step per episode once the
/// buffer holds a batch, target refresh on episode boundaries, evaluation
/// every eval_interval env steps (and at 0 and the end).
TrainResult run_training(const RunConfig& cfg, const TrainOptions& opt = {});

/// Rebuilds a learner from a checkpoint, including its config.
Learner learner_from_checkpoint(const nn::Checkpoint& ckpt, RunConfig* cfg_out = nullptr);

}  // namespace macpo
