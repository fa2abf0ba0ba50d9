#pragma once

// Per-sample kernel bodies shared by the serial and OpenMP drivers.

#include <cmath>

#include "macpo/kernels.hpp"
#include "macpo/priority/formulas.hpp"

namespace macpo::kernels::detail {

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
inline double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

inline void shape_mix_grads(const MixInputs& in, MixGrads& g) {
  const Eigen::Index N = in.q.cols();
  g.h1.resize(in.h1.rows(), N);
  g.b1.resize(in.b1.rows(), N);
  g.h2.resize(in.h2.rows(), N);
  g.v.resize(1, N);
  g.q.resize(in.q.rows(), N);
}

inline void mix_forward_one(const MixInputs& in, Eigen::Index i, Matrix& z, Matrix& q_tot) {
  const Eigen::Index n = in.q.rows();
  const Eigen::Index E = in.b1.rows();
  double out = in.v(0, i);
  for (Eigen::Index e = 0; e < E; ++e) {
    double acc = in.b1(e, i);
    for (Eigen::Index a = 0; a < n; ++a) acc += in.q(a, i) * std::abs(in.h1(a * E + e, i));
    z(e, i) = acc;
    out += elu(acc) * std::abs(in.h2(e, i));
  }
  q_tot(0, i) = out;
}

inline void mix_backward_one(const MixInputs& in, const Matrix& z, const Matrix& d_q_tot, Eigen::Index i,
                             MixGrads& g) {
  const Eigen::Index n = in.q.rows();
  const Eigen::Index E = in.b1.rows();
  const double dq = d_q_tot(0, i);
  g.v(0, i) = dq;
  for (Eigen::Index a = 0; a < n; ++a) g.q(a, i) = 0.0;
  for (Eigen::Index e = 0; e < E; ++e) {
    const double ze = z(e, i);
    const double h2 = in.h2(e, i);
    g.h2(e, i) = dq * elu(ze) * sgn(h2);
    const double dz = dq * std::abs(h2) * elu_grad(ze);
    g.b1(e, i) = dz;
    for (Eigen::Index a = 0; a < n; ++a) {
      const double h1 = in.h1(a * E + e, i);
      g.h1(a * E + e, i) = dz * in.q(a, i) * sgn(h1);
      g.q(a, i) += dz * std::abs(h1);
    }
  }
}

inline void taken_prob_one(const Matrix& utilities, std::span<const std::uint8_t> avail,
                           std::span<const int> actions, Eigen::Index col, std::span<double> out) {
  const auto m = static_cast<std::size_t>(utilities.rows());
  const auto c = static_cast<std::size_t>(col);
  std::span<const double> u(utilities.data() + c * m, m);
  out[c] = boltzmann_prob(u, avail.subspan(c * m, m), actions[c]);
}

inline double value_term(double err, double gap) { return err * std::exp(-gap); }

inline void td_lambda_row(std::span<const double> rewards, std::span<const std::uint8_t> terminated,
                          std::span<const std::uint8_t> mask, std::span<const double> next_value, int b, int time,
                          double gamma, double lambda, std::span<double> out) {
  double y_next = 0.0;
  bool next_filled = false;
  for (int t = time - 1; t >= 0; --t) {
    const auto k = static_cast<std::size_t>(b) * static_cast<std::size_t>(time) + static_cast<std::size_t>(t);
    if (!mask[k]) {
      out[k] = 0.0;
      next_filled = false;
      continue;
    }
    double y = rewards[k];
    if (!terminated[k]) {
      const double boot = next_value[k];
      const double cont = next_filled ? y_next : boot;
      y += gamma * ((1.0 - lambda) * boot + lambda * cont);
    }
    out[k] = y;
    y_next = y;
    next_filled = true;
  }
}

}  // namespace macpo::kernels::detail
