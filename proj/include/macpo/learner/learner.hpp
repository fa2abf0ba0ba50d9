#pragma once

#include <optional>
#include <span>
#include <vector>

#include "macpo/config.hpp"
#include "macpo/kernels.hpp"
#include "macpo/learner/batch.hpp"
#include "macpo/nn/adam.hpp"
#include "macpo/nn/agent_net.hpp"
#include "macpo/nn/checkpoint.hpp"
#include "macpo/nn/mixers.hpp"
#include "macpo/priority/weights.hpp"

namespace macpo {

struct TrainMetrics {
  double loss = 0.0;
  double central_loss = 0.0;
  double grad_norm = 0.0;
  double raw_mean = 0.0;
  double raw_max = 0.0;
  double entropy = 0.0;
  double mean_q = 0.0;
  bool fallback_uniform = false;
};

/// Everything a train step computes before touching parameters.
struct StepEvaluation {
  std::vector<double> q_tot;      // live monotonic value per sample
  std::vector<double> q_star;     // live unrestricted value per sample
  std::vector<double> targets;    // TD(lambda) target for q_tot
  std::vector<double> central_targets;
  WeightInputs weight_inputs;
  PriorityWeights weights;
};

struct Gradients {
  std::vector<double> agent;
  std::vector<double> mixer;
  std::vector<double> central;
  double loss = 0.0;
  double central_loss = 0.0;
  StepEvaluation eval;
};

/// Agent network, monotonic mixer, unrestricted mixer and their targets,
/// trained with a weighted TD(lambda) regression.
class Learner {
 public:
  Learner(const RunConfig& cfg, const EpisodeShape& shape, Rng init_rng,
          kernels::ExecPolicy policy = kernels::ExecPolicy::serial);

  const nn::AgentNet& agent() const { return agent_; }
  nn::AgentNet& agent() { return agent_; }
  nn::MonotonicMixer& mixer() { return mixer_; }
  const nn::MonotonicMixer& mixer() const { return mixer_; }
  nn::UnrestrictedMixer& central() { return central_; }
  const nn::UnrestrictedMixer& central() const { return central_; }
  const nn::AgentNet& target_agent() const { return target_agent_; }
  const nn::MonotonicMixer& target_mixer() const { return target_mixer_; }
  const nn::UnrestrictedMixer& target_central() const { return target_central_; }
  nn::AgentNet& target_agent() { return target_agent_; }
  nn::MonotonicMixer& target_mixer() { return target_mixer_; }
  nn::UnrestrictedMixer& target_central() { return target_central_; }

  EpisodeBatch make_batch(const std::vector<const Episode*>& episodes) const;

  /// Forward pass, targets and scheme weights, without gradients.
  StepEvaluation evaluate(const EpisodeBatch& batch) const;

  /// Gradients of the weighted loss. Weights come from the configured scheme
  /// unless fixed_weights is given; either way they are constants.
  Gradients compute_gradients(const EpisodeBatch& batch,
                              std::optional<std::span<const double>> fixed_weights = std::nullopt) const;

  /// sum(mask * w * (Q_tot - y)^2) / sum(mask) with y from the target nets.
  double weighted_loss(const EpisodeBatch& batch, std::span<const double> weights) const;
  double central_loss(const EpisodeBatch& batch) const;

  /// Clips, applies Adam and counts the step. Throws std::runtime_error on a
  /// nonfinite loss.
  TrainMetrics train_step(const EpisodeBatch& batch);
  void apply(Gradients& g);

  /// Copies live parameters to targets whenever episodes_seen has crossed a
  /// new multiple of the target interval. Returns true if it copied.
  bool maybe_update_targets(long episodes_seen);
  void update_targets();

  long train_steps() const { return train_steps_; }

  nn::Checkpoint to_checkpoint() const;
  void load_checkpoint(const nn::Checkpoint& ckpt);

 private:
  struct Forward;
  void forward_all(const EpisodeBatch& batch, Forward& f, bool with_cache) const;
  StepEvaluation evaluation_from(const EpisodeBatch& batch, const Forward& f) const;

  RunConfig cfg_;
  EpisodeShape shape_;
  kernels::ExecPolicy policy_;
  nn::AgentNet agent_, target_agent_;
  nn::MonotonicMixer mixer_, target_mixer_;
  nn::UnrestrictedMixer central_, target_central_;
  nn::AdamState agent_opt_, mixer_opt_, central_opt_;
  long train_steps_ = 0;
  long last_target_boundary_ = 0;
};

}  // namespace macpo
