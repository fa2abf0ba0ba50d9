#pragma once

#include <string>
#include <vector>

#include "macpo/config.hpp"

namespace macpo {

/// 7x7, 4 predators, 2 prey, limit 100, 300k env steps.
RunConfig scaled_config(double punishment, Scheme scheme = Scheme::macpo);
/// 10x10, 8 predators, 8 prey, limit 200.
RunConfig full_config(double punishment, Scheme scheme = Scheme::macpo);
/// Hostile 3x3 game, uniform exploration, 2000 updates.
RunConfig matrix_game_config(Scheme scheme = Scheme::macpo);
/// 2x2 cooperative game with a single optimum, 2000 updates.
RunConfig cooperative_2x2_config(Scheme scheme = Scheme::macpo);

/// Names accepted by preset(): scaled_p0, scaled_p-1.5, full_p0, full_p-1.5,
/// matrix_game, cooperative_2x2.
const std::vector<std::string>& preset_names();
RunConfig preset(const std::string& name);

}  // namespace macpo
