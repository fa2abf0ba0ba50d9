#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "macpo/kernels.hpp"
#include "macpo/priority/formulas.hpp"
#include "macpo/priority/scheme.hpp"

namespace macpo {

/// Per-sample quantities every scheme draws from. Samples are laid out
/// episode-major (sample = episode * time + t) so PSER can walk time.
struct WeightInputs {
  std::vector<double> bellman_error;  // |Q_tot - y|
  std::vector<double> value_gap;      // |Q_tot - Q*|
  std::vector<double> probs;          // taken-action probability, sample * n_agents + agent
  std::vector<std::uint8_t> filled;
  int n_agents = 1;
  int episodes = 1;
  int time = 0;  // 0: one episode spanning all samples

  std::size_t samples() const { return bellman_error.size(); }
  /// Throws std::invalid_argument on size mismatch, negative or nonfinite values.
  void validate() const;
};

struct PriorityWeights {
  std::vector<double> w;  // mean over filled samples == 1, masked samples == 0
  double raw_mean = 0.0;  // before capping and normalization
  double raw_max = 0.0;
  double entropy = 0.0;   // of w / sum(w) over filled samples
  bool fallback_uniform = false;
};

struct WeightOptions {
  ApproxThresholds thresholds;
  double pser_decay = 0.4;
  int pser_window = 5;
  double cap = 10.0;  // raw weights clipped at cap * raw mean; 0 disables
  kernels::ExecPolicy policy = kernels::ExecPolicy::serial;
};

/// Masks, caps and mean-normalizes raw weights. All-zero raw weights fall
/// back to uniform.
PriorityWeights normalize_weights(std::span<const double> raw, std::span<const std::uint8_t> filled, double cap);

PriorityWeights macpo_exact(const WeightInputs& in, const WeightOptions& opt = {});
PriorityWeights macpo_approx(const WeightInputs& in, const WeightOptions& opt = {});
PriorityWeights per_weights(std::span<const double> bellman_error, std::span<const std::uint8_t> filled,
                            const WeightOptions& opt = {});
PriorityWeights discor_weights(std::span<const double> bellman_error, std::span<const double> value_gap,
                               std::span<const std::uint8_t> filled, const WeightOptions& opt = {});
/// likelihood is the product of the agents' taken-action probabilities.
PriorityWeights remern_weights(std::span<const double> bellman_error, std::span<const double> value_gap,
                               std::span<const double> likelihood, std::span<const std::uint8_t> filled,
                               const WeightOptions& opt = {});
PriorityWeights uniform_weights(std::span<const std::uint8_t> filled);

/// p_t <- max(p_t, decay^k * p_{t-k}), k = 1..window, using the original
/// priorities and never crossing an episode boundary or a masked step.
std::vector<double> pser_propagate(std::span<const double> priorities, std::span<const std::uint8_t> filled,
                                   int episodes, int time, double decay, int window);
PriorityWeights pser_weights(std::span<const double> priorities, std::span<const std::uint8_t> filled, int episodes,
                             int time, const WeightOptions& opt = {});

/// Dispatch by scheme name.
PriorityWeights compute_weights(Scheme scheme, const WeightInputs& in, const WeightOptions& opt = {});

}  // namespace macpo
