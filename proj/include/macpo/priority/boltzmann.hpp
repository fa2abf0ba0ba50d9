#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace macpo {

/// Temperature-1 softmax over available actions; unavailable entries get
/// probability 0. Throws std::invalid_argument if nothing is available or a
/// utility is nonfinite.
std::vector<double> boltzmann_policy(std::span<const double> utilities, std::span<const std::uint8_t> avail);

std::vector<std::vector<double>> boltzmann_policies(const std::vector<std::vector<double>>& utilities,
                                                    const std::vector<std::vector<std::uint8_t>>& avail);

}  // namespace macpo
