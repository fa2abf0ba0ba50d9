#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "macpo/env/env_spec.hpp"
#include "macpo/priority/scheme.hpp"

namespace macpo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce one training run.
struct RunConfig {
  EnvSpec env;

  // learner
  int batch_size = 128;
  int buffer_capacity = 10000;
  int target_update_interval = 200;  // episodes
  double learning_rate = 0.001;
  double td_lambda = 0.6;
  double gamma = 0.99;
  double epsilon_start = 0.995;
  double epsilon_finish = 0.05;
  long epsilon_anneal_steps = 100000;
  bool double_q = true;
  double grad_clip = 10.0;
  int agent_hidden = 64;
  int mixer_embed = 32;
  int hypernet_hidden = 64;
  int central_hidden = 64;

  // priority
  Scheme scheme = Scheme::macpo;
  ApproxThresholds thresholds;
  double pser_decay = 0.4;
  int pser_window = 5;
  double weight_cap = 10.0;

  // run
  std::uint64_t seed = 1;
  long t_max = 300000;
  long eval_interval = 10000;
  int eval_episodes = 32;
  long checkpoint_interval = 0;  // env steps, 0 = final checkpoint only

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the sectioned key=value format. Unknown sections or keys and
/// unparsable values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form: every key, fixed order, round-trip exact doubles.
std::string serialize_config(const RunConfig& cfg);

/// Applies one "section.key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Fully-qualified "section.key" names in canonical order.
std::vector<std::string> config_keys();

}  // namespace macpo
