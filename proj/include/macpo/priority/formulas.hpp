#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "macpo/priority/scheme.hpp"

namespace macpo {

/// 1 + sum_i prod_{j != i} p_j - n prod_i p_i, evaluated with prefix and
/// suffix products so it stays O(n) and exact when some p_j are zero.
inline double joint_prob_term(std::span<const double> p) {
  const std::size_t n = p.size();
  double all = 1.0;
  for (double x : p) all *= x;
  double sum_leave_one = 0.0;
  double prefix = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double suffix = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) suffix *= p[j];
    sum_leave_one += prefix * suffix;
    prefix *= p[i];
  }
  return 1.0 + sum_leave_one - static_cast<double>(n) * all;
}

/// Scaled weight chosen by the taken-action probabilities:
///   high   - exactly one agent below eps_low, every other above eps_high
///   low    - every agent above eps_high, or two or more below eps_low
///   medium - anything else
inline double approx_alpha(std::span<const double> p, const ApproxThresholds& th) {
  std::size_t small = 0;
  std::size_t large = 0;
  for (double x : p) {
    if (x < th.eps_low) ++small;
    if (x > th.eps_high) ++large;
  }
  const std::size_t n = p.size();
  if (small == 1 && large + 1 == n) return th.alpha_high;
  if (large == n || small >= 2) return th.alpha_low;
  return th.alpha_medium;
}

/// Boltzmann (temperature 1) probability of `action` over the available
/// entries of `utilities`, max-subtracted.
inline double boltzmann_prob(std::span<const double> utilities, std::span<const std::uint8_t> avail, int action) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < utilities.size(); ++i)
    if (avail[i]) top = std::max(top, utilities[i]);
  if (top == -std::numeric_limits<double>::infinity()) throw std::invalid_argument("no available action");
  const auto u = static_cast<std::size_t>(action);
  if (!avail[u]) return 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i)
    if (avail[i]) z += std::exp(utilities[i] - top);
  return std::exp(utilities[u] - top) / z;
}

}  // namespace macpo
