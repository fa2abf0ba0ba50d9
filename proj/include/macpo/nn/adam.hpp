#pragma once

#include <span>
#include <vector>

namespace macpo::nn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update. Throws std::runtime_error if any gradient is
/// nonfinite, before touching the parameters or moments.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

/// Rescales grads in place so their L2 norm is at most max_norm (0 disables).
/// Returns the norm before clipping.
double clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace macpo::nn
