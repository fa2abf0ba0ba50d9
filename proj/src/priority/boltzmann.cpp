#include "macpo/priority/boltzmann.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace macpo {

std::vector<double> boltzmann_policy(std::span<const double> utilities, std::span<const std::uint8_t> avail) {
  if (utilities.size() != avail.size()) throw std::invalid_argument("boltzmann_policy: size mismatch");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    if (!std::isfinite(utilities[i])) throw std::invalid_argument("boltzmann_policy: nonfinite utility");
    if (avail[i]) top = std::max(top, utilities[i]);
  }
  if (top == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("boltzmann_policy: no available action");
  std::vector<double> p(utilities.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i)
    if (avail[i]) z += p[i] = std::exp(utilities[i] - top);
  for (double& x : p) x /= z;
  return p;
}

std::vector<std::vector<double>> boltzmann_policies(const std::vector<std::vector<double>>& utilities,
                                                    const std::vector<std::vector<std::uint8_t>>& avail) {
  if (utilities.size() != avail.size()) throw std::invalid_argument("boltzmann_policies: agent count mismatch");
  std::vector<std::vector<double>> out;
  out.reserve(utilities.size());
  for (std::size_t a = 0; a < utilities.size(); ++a) out.push_back(boltzmann_policy(utilities[a], avail[a]));
  return out;
}

}  // namespace macpo
