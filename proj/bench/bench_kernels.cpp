// Serial reference kernels against their OpenMP counterparts.
//   bench_kernels [samples] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <omp.h>
#include <vector>

#include "macpo/kernels.hpp"
#include "macpo/rng.hpp"

using macpo::kernels::Matrix;

namespace {

Matrix random_matrix(int rows, int cols, macpo::Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double time_ms(const std::function<void()>& f, int repeats) {
  f();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / repeats;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-20s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int N = argc > 1 ? std::atoi(argv[1]) : 128 * 100;  // batch x time of the scaled desk config
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;
  const int n = 4, E = 32, m = 6;
  std::printf("samples=%d agents=%d embed=%d threads=%d\n", N, n, E, omp_get_max_threads());

  macpo::Rng rng(1, 0);
  const Matrix h1 = random_matrix(n * E, N, rng), b1 = random_matrix(E, N, rng), h2 = random_matrix(E, N, rng),
               v = random_matrix(1, N, rng), q = random_matrix(n, N, rng), d = random_matrix(1, N, rng);
  const macpo::kernels::MixInputs in{h1, b1, h2, v, q};
  Matrix z, out;
  macpo::kernels::MixGrads g;
  macpo::kernels::serial::mix_forward(in, z, out);

  report("mix_forward", time_ms([&] { macpo::kernels::serial::mix_forward(in, z, out); }, repeats),
         time_ms([&] { macpo::kernels::parallel::mix_forward(in, z, out); }, repeats));
  report("mix_backward", time_ms([&] { macpo::kernels::serial::mix_backward(in, z, d, g); }, repeats),
         time_ms([&] { macpo::kernels::parallel::mix_backward(in, z, d, g); }, repeats));

  const Matrix u = random_matrix(m, N * n, rng);
  std::vector<std::uint8_t> avail(static_cast<std::size_t>(N) * n * m, 1);
  std::vector<int> acts(static_cast<std::size_t>(N) * n);
  for (int& a : acts) a = static_cast<int>(rng.below(m));
  std::vector<double> probs(acts.size());
  report("taken_action_probs",
         time_ms([&] { macpo::kernels::serial::taken_action_probs(u, avail, acts, n, probs); }, repeats),
         time_ms([&] { macpo::kernels::parallel::taken_action_probs(u, avail, acts, n, probs); }, repeats));

  std::vector<double> err(static_cast<std::size_t>(N)), gap(err.size()), raw(err.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    err[i] = std::abs(rng.normal());
    gap[i] = std::abs(rng.normal());
  }
  report("raw_macpo_exact", time_ms([&] { macpo::kernels::serial::raw_macpo_exact(err, gap, probs, n, raw); }, repeats),
         time_ms([&] { macpo::kernels::parallel::raw_macpo_exact(err, gap, probs, n, raw); }, repeats));

  const int T = 100, B = N / T;
  std::vector<double> r(static_cast<std::size_t>(B) * T), nv(r.size()), y(r.size());
  std::vector<std::uint8_t> term(r.size(), 0), mask(r.size(), 1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = rng.normal();
    nv[i] = rng.normal();
  }
  report("td_lambda",
         time_ms([&] { macpo::kernels::serial::td_lambda(r, term, mask, nv, B, T, 0.99, 0.6, y); }, repeats),
         time_ms([&] { macpo::kernels::parallel::td_lambda(r, term, mask, nv, B, T, 0.99, 0.6, y); }, repeats));
  return 0;
}
