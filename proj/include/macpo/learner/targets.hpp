#pragma once

#include <span>
#include <vector>

#include "macpo/kernels.hpp"

namespace macpo {

/// TD(lambda) returns for a batch x time layout. next_value[b*time+t] is the
/// bootstrap value of the state after step t; it is ignored for terminal
/// steps. When step t+1 is not filled the full bootstrap is used.
std::vector<double> td_lambda_targets(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
                                      std::span<const std::uint8_t> mask, std::span<const double> next_value,
                                      int batch, int time, double gamma, double lambda,
                                      kernels::ExecPolicy policy = kernels::ExecPolicy::serial);

}  // namespace macpo
