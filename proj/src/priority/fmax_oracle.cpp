#include "macpo/priority/fmax_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "macpo/priority/formulas.hpp"

namespace macpo {

FmaxResult fmax_oracle(int n, double step, const JointProbFn& f) {
  if (n < 2) throw std::invalid_argument("fmax_oracle needs n >= 2");
  const double k_real = 1.0 / step;
  const long k = std::lround(k_real);
  if (!(step > 0.0) || k < 1 || std::abs(static_cast<double>(k) * step - 1.0) > 1e-9)
    throw std::invalid_argument("fmax_oracle: grid step must divide 1");
  const JointProbFn eval = f ? f : JointProbFn([](std::span<const double> p) { return joint_prob_term(p); });

  std::vector<long> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  FmaxResult out;
  out.max_value = -std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(idx[i]) / static_cast<double>(k);
    const double v = eval(p);
    ++out.points;
    if (v > out.max_value + 1e-12) {
      out.max_value = v;
      out.maximizers.clear();
    }
    if (std::abs(v - out.max_value) <= 1e-12) out.maximizers.push_back(p);
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] > k) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return out;
}

}  // namespace macpo
