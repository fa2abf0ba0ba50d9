#pragma once

#include <functional>
#include <span>
#include <vector>

namespace macpo {

struct FmaxResult {
  double max_value = 0.0;
  std::vector<std::vector<double>> maximizers;
  std::size_t points = 0;
};

using JointProbFn = std::function<double(std::span<const double>)>;

/// Exhaustive search of f over the grid {0, step, ..., 1}^n. Every grid
/// point within 1e-12 of the maximum is returned. step must divide 1.
/// The evaluated function defaults to joint_prob_term.
FmaxResult fmax_oracle(int n, double step, const JointProbFn& f = {});

}  // namespace macpo
