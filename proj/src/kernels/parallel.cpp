#include "bodies.hpp"

namespace macpo::kernels {

namespace parallel {

void mix_forward(const MixInputs& in, Matrix& z, Matrix& q_tot) {
  const Eigen::Index N = in.q.cols();
  z.resize(in.b1.rows(), N);
  q_tot.resize(1, N);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < N; ++i) detail::mix_forward_one(in, i, z, q_tot);
}

void mix_backward(const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out) {
  detail::shape_mix_grads(in, out);
  const Eigen::Index N = in.q.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < N; ++i) detail::mix_backward_one(in, z, d_q_tot, i, out);
}

void taken_action_probs(const Matrix& utilities, std::span<const std::uint8_t> avail, std::span<const int> actions,
                        int, std::span<double> out) {
  const Eigen::Index cols = utilities.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < cols; ++c) detail::taken_prob_one(utilities, avail, actions, c, out);
}

void raw_macpo_exact(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                     int n_agents, std::span<double> out) {
  const auto n = static_cast<std::size_t>(n_agents);
  const auto S = static_cast<std::ptrdiff_t>(err.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < S; ++i) {
    const auto s = static_cast<std::size_t>(i);
    out[s] = detail::value_term(err[s], gap[s]) * joint_prob_term(probs.subspan(s * n, n));
  }
}

void raw_macpo_approx(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                      int n_agents, const ApproxThresholds& th, std::span<double> out) {
  const auto n = static_cast<std::size_t>(n_agents);
  const auto S = static_cast<std::ptrdiff_t>(err.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < S; ++i) {
    const auto s = static_cast<std::size_t>(i);
    out[s] = detail::value_term(err[s], gap[s]) * approx_alpha(probs.subspan(s * n, n), th);
  }
}

void td_lambda(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b)
    detail::td_lambda_row(rewards, terminated, mask, next_value, b, time, gamma, lambda, out);
}

}  // namespace parallel
}  // namespace macpo::kernels
