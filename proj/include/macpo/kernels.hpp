#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "macpo/priority/scheme.hpp"

namespace macpo::kernels {

/// serial is the reference path and the one used in deterministic mode.
/// Every parallel kernel writes disjoint outputs per sample, so both paths
/// produce bit-identical results.
enum class ExecPolicy { serial, parallel };

using Matrix = Eigen::MatrixXd;

/// Per-sample monotonic mixing. Columns are samples.
///   w1 = |h1| viewed as (n x E), w2 = |h2|
///   z  = q^T w1 + b1,  Q = elu(z) . w2 + v
struct MixInputs {
  const Matrix& h1;  // (n*E) x N
  const Matrix& b1;  // E x N
  const Matrix& h2;  // E x N
  const Matrix& v;   // 1 x N
  const Matrix& q;   // n x N
};

void mix_forward(ExecPolicy policy, const MixInputs& in, Matrix& z, Matrix& q_tot);

struct MixGrads {
  Matrix h1, b1, h2, v, q;
};

void mix_backward(ExecPolicy policy, const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out);

/// Taken-action Boltzmann probabilities. utilities is m x (S*n) with column
/// s*n + a; avail is laid out the same way (S*n*m bytes); actions S*n.
void taken_action_probs(ExecPolicy policy, const Matrix& utilities, std::span<const std::uint8_t> avail,
                        std::span<const int> actions, int n_agents, std::span<double> out);

/// Unnormalized MAC-PO weights: err * exp(-gap) * f(probs).
void raw_macpo_exact(ExecPolicy policy, std::span<const double> err, std::span<const double> gap,
                     std::span<const double> probs, int n_agents, std::span<double> out);

/// Unnormalized approximated weights: err * exp(-gap) * alpha(probs).
void raw_macpo_approx(ExecPolicy policy, std::span<const double> err, std::span<const double> gap,
                      std::span<const double> probs, int n_agents, const ApproxThresholds& th,
                      std::span<double> out);

/// Backward TD(lambda) over each episode row of a B x T layout:
///   y_t = r_t + gamma * [(1 - lambda) * next_value_t + lambda * y_{t+1}]
/// next_value_t is the bootstrap value of s_{t+1}; both terms vanish after a
/// terminal step and beyond the filled region.
void td_lambda(ExecPolicy policy, std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out);

namespace serial {
void mix_forward(const MixInputs& in, Matrix& z, Matrix& q_tot);
void mix_backward(const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out);
void taken_action_probs(const Matrix& utilities, std::span<const std::uint8_t> avail, std::span<const int> actions,
                        int n_agents, std::span<double> out);
void raw_macpo_exact(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                     int n_agents, std::span<double> out);
void raw_macpo_approx(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                      int n_agents, const ApproxThresholds& th, std::span<double> out);
void td_lambda(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out);
}  // namespace serial

namespace parallel {
void mix_forward(const MixInputs& in, Matrix& z, Matrix& q_tot);
void mix_backward(const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out);
void taken_action_probs(const Matrix& utilities, std::span<const std::uint8_t> avail, std::span<const int> actions,
                        int n_agents, std::span<double> out);
void raw_macpo_exact(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                     int n_agents, std::span<double> out);
void raw_macpo_approx(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                      int n_agents, const ApproxThresholds& th, std::span<double> out);
void td_lambda(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out);
}  // namespace parallel

}  // namespace macpo::kernels
