#include "bodies.hpp"

namespace macpo::kernels {

namespace serial {

void mix_forward(const MixInputs& in, Matrix& z, Matrix& q_tot) {
  const Eigen::Index N = in.q.cols();
  z.resize(in.b1.rows(), N);
  q_tot.resize(1, N);
  for (Eigen::Index i = 0; i < N; ++i) detail::mix_forward_one(in, i, z, q_tot);
}

void mix_backward(const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out) {
  detail::shape_mix_grads(in, out);
  for (Eigen::Index i = 0; i < in.q.cols(); ++i) detail::mix_backward_one(in, z, d_q_tot, i, out);
}

void taken_action_probs(const Matrix& utilities, std::span<const std::uint8_t> avail, std::span<const int> actions,
                        int, std::span<double> out) {
  for (Eigen::Index c = 0; c < utilities.cols(); ++c) detail::taken_prob_one(utilities, avail, actions, c, out);
}

void raw_macpo_exact(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                     int n_agents, std::span<double> out) {
  const auto n = static_cast<std::size_t>(n_agents);
  for (std::size_t s = 0; s < err.size(); ++s)
    out[s] = detail::value_term(err[s], gap[s]) * joint_prob_term(probs.subspan(s * n, n));
}

void raw_macpo_approx(std::span<const double> err, std::span<const double> gap, std::span<const double> probs,
                      int n_agents, const ApproxThresholds& th, std::span<double> out) {
  const auto n = static_cast<std::size_t>(n_agents);
  for (std::size_t s = 0; s < err.size(); ++s)
    out[s] = detail::value_term(err[s], gap[s]) * approx_alpha(probs.subspan(s * n, n), th);
}

void td_lambda(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out) {
  for (int b = 0; b < batch; ++b)
    detail::td_lambda_row(rewards, terminated, mask, next_value, b, time, gamma, lambda, out);
}

}  // namespace serial

void mix_forward(ExecPolicy p, const MixInputs& in, Matrix& z, Matrix& q_tot) {
  p == ExecPolicy::serial ? serial::mix_forward(in, z, q_tot) : parallel::mix_forward(in, z, q_tot);
}

void mix_backward(ExecPolicy p, const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, MixGrads& out) {
  p == ExecPolicy::serial ? serial::mix_backward(in, z, d_q_tot, out) : parallel::mix_backward(in, z, d_q_tot, out);
}

void taken_action_probs(ExecPolicy p, const Matrix& utilities, std::span<const std::uint8_t> avail,
                        std::span<const int> actions, int n_agents, std::span<double> out) {
  p == ExecPolicy::serial ? serial::taken_action_probs(utilities, avail, actions, n_agents, out)
                          : parallel::taken_action_probs(utilities, avail, actions, n_agents, out);
}

void raw_macpo_exact(ExecPolicy p, std::span<const double> err, std::span<const double> gap,
                     std::span<const double> probs, int n_agents, std::span<double> out) {
  p == ExecPolicy::serial ? serial::raw_macpo_exact(err, gap, probs, n_agents, out)
                          : parallel::raw_macpo_exact(err, gap, probs, n_agents, out);
}

void raw_macpo_approx(ExecPolicy p, std::span<const double> err, std::span<const double> gap,
                      std::span<const double> probs, int n_agents, const ApproxThresholds& th,
                      std::span<double> out) {
  p == ExecPolicy::serial ? serial::raw_macpo_approx(err, gap, probs, n_agents, th, out)
                          : parallel::raw_macpo_approx(err, gap, probs, n_agents, th, out);
}

void td_lambda(ExecPolicy p, std::span<const double> rewards, std::span<const std::uint8_t> terminated,
               std::span<const std::uint8_t> mask, std::span<const double> next_value, int batch, int time,
               double gamma, double lambda, std::span<double> out) {
  p == ExecPolicy::serial
      ? serial::td_lambda(rewards, terminated, mask, next_value, batch, time, gamma, lambda, out)
      : parallel::td_lambda(rewards, terminated, mask, next_value, batch, time, gamma, lambda, out);
}

}  // namespace macpo::kernels
