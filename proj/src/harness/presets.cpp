#include "macpo/harness/presets.hpp"

#include <stdexcept>

namespace macpo {

namespace {

RunConfig matrix_base(EnvSpec env, Scheme scheme) {
  RunConfig c;
  c.env = std::move(env);
  c.scheme = scheme;
  c.batch_size = 32;
  c.buffer_capacity = 5000;
  // Every joint action is visited; the optimum has to be found from data.
  c.epsilon_start = 1.0;
  c.epsilon_finish = 1.0;
  c.epsilon_anneal_steps = 1;
  c.t_max = 2000 + c.batch_size - 1;  // one update per episode once the buffer holds a batch
  c.eval_interval = 500;
  c.eval_episodes = 1;
  return c;
}

}  // namespace

RunConfig scaled_config(double punishment, Scheme scheme) {
  RunConfig c;
  c.env = scaled_predator_prey(punishment);
  c.scheme = scheme;
  return c;
}

RunConfig full_config(double punishment, Scheme scheme) {
  RunConfig c;
  c.env = full_predator_prey(punishment);
  c.scheme = scheme;
  c.t_max = 2000000;
  return c;
}

RunConfig matrix_game_config(Scheme scheme) { return matrix_base(hostile_matrix_game(), scheme); }

RunConfig cooperative_2x2_config(Scheme scheme) { return matrix_base(cooperative_matrix_game(), scheme); }

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"scaled_p0", "scaled_p-1.5", "full_p0",
                                                 "full_p-1.5", "matrix_game", "cooperative_2x2"};
  return names;
}

RunConfig preset(const std::string& name) {
  if (name == "scaled_p0") return scaled_config(0.0);
  if (name == "scaled_p-1.5") return scaled_config(-1.5);
  if (name == "full_p0") return full_config(0.0);
  if (name == "full_p-1.5") return full_config(-1.5);
  if (name == "matrix_game") return matrix_game_config();
  if (name == "cooperative_2x2") return cooperative_2x2_config();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace macpo
