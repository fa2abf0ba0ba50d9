#pragma once

#include <string>

namespace macpo {

enum class Scheme { macpo, macpo_approx, uniform, per, discor, remern, pser };

std::string to_string(Scheme s);
/// Throws std::invalid_argument naming the unknown scheme.
Scheme scheme_from_string(const std::string& s);

/// Cutoffs and scaled weights for the approximated scheme.
struct ApproxThresholds {
  double eps_low = 0.1;
  double eps_high = 0.9;
  double alpha_high = 0.75;
  double alpha_medium = 0.5;
  double alpha_low = 0.25;

  void validate() const;
  friend bool operator==(const ApproxThresholds&, const ApproxThresholds&) = default;
};

}  // namespace macpo
