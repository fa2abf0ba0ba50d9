#include <doctest.h>

#include <cmath>
#include <sstream>

#include "macpo/nn/adam.hpp"
#include "macpo/nn/agent_net.hpp"
#include "macpo/nn/checkpoint.hpp"
#include "macpo/nn/mixers.hpp"
#include "macpo/nn/mlp.hpp"

using namespace macpo;
using namespace macpo::nn;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

double act(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0 ? x : 0.0;
    case Activation::elu: return x > 0 ? x : std::expm1(x);
  }
  return 0.0;
}

// Plain-loop evaluation straight from the documented layout.
std::vector<double> reference_forward(const Mlp& mlp, std::span<const double> p, std::vector<double> x) {
  std::size_t off = 0;
  for (int l = 0; l < mlp.layers(); ++l) {
    const int in = mlp.sizes()[static_cast<std::size_t>(l)];
    const int out = mlp.sizes()[static_cast<std::size_t>(l) + 1];
    std::vector<double> y(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      long double s = p[off + static_cast<std::size_t>(in * out + o)];
      for (int i = 0; i < in; ++i) s += static_cast<long double>(p[off + static_cast<std::size_t>(i * out + o)]) * x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(o)] = act(mlp.activations()[static_cast<std::size_t>(l)], static_cast<double>(s));
    }
    off += static_cast<std::size_t>(in * out + out);
    x = std::move(y);
  }
  return x;
}

// Sets a final-layer-bias-only network: every output equals `value`.
void constant_output(const Mlp& mlp, std::span<double> block, double value) {
  for (auto& v : block) v = 0.0;
  const auto out = static_cast<std::size_t>(mlp.output_size());
  for (std::size_t i = block.size() - out; i < block.size(); ++i) block[i] = value;
}

}  // namespace

TEST_CASE("zero-weight mlp outputs its final bias") {
  Mlp mlp({3, 4, 2}, {Activation::elu, Activation::identity});
  Parameters p(mlp.param_count());
  auto v = p.mutable_values();
  const std::size_t n = v.size();
  v[n - 2] = 0.3;
  v[n - 1] = -1.25;
  Rng rng(1);
  const Matrix y = mlp.forward(ParamView::of(p), random_matrix(3, 5, rng));
  for (int j = 0; j < 5; ++j) {
    CHECK(y(0, j) == 0.3);
    CHECK(y(1, j) == -1.25);
  }
}

TEST_CASE("one identity layer is W x + b") {
  Mlp mlp({2, 2}, {Activation::identity});
  Parameters p(mlp.param_count());
  auto v = p.mutable_values();
  // W = [[1, 2], [3, 4]] column-major, b = (0.5, -0.5)
  const double vals[] = {1, 3, 2, 4, 0.5, -0.5};
  std::copy(std::begin(vals), std::end(vals), v.begin());
  const double x[] = {1.0, -2.0};
  const auto y = mlp.forward(ParamView::of(p), std::span<const double>(x));
  CHECK(y[0] == 1 * 1 + 2 * -2 + 0.5);
  CHECK(y[1] == 3 * 1 + 4 * -2 - 0.5);
}

TEST_CASE("mlp forward matches a loop re-evaluation") {
  Mlp mlp({6, 8, 8, 3}, {Activation::elu, Activation::relu, Activation::identity});
  Parameters p(mlp.param_count());
  Rng rng(5);
  mlp.init(p.mutable_values(), rng);
  const Matrix x = random_matrix(6, 7, rng);
  const Matrix y = mlp.forward(ParamView::of(p), x);
  for (int j = 0; j < x.cols(); ++j) {
    std::vector<double> col(x.col(j).data(), x.col(j).data() + 6);
    const auto ref = reference_forward(mlp, p.values(), col);
    for (int o = 0; o < 3; ++o) CHECK(std::abs(y(o, j) - ref[static_cast<std::size_t>(o)]) < 1e-12);
  }
}

TEST_CASE("mlp rejects a dimension mismatch") {
  Mlp mlp({3, 2}, {Activation::identity});
  Parameters p(mlp.param_count());
  CHECK_THROWS_AS(mlp.forward(ParamView::of(p), Matrix::Zero(4, 1)), std::invalid_argument);
}

TEST_CASE("mlp backward: zero output gradient and linear closed form") {
  Mlp mlp({3, 2}, {Activation::identity});
  Parameters p(mlp.param_count());
  Rng rng(2);
  mlp.init(p.mutable_values(), rng);
  const Matrix x = random_matrix(3, 1, rng);
  MlpCache cache;
  mlp.forward(ParamView::of(p), x, &cache);

  std::vector<double> grad(p.size(), 0.0);
  mlp.backward(ParamView::of(p), cache, Matrix::Zero(2, 1), grad);
  for (double g : grad) CHECK(g == 0.0);

  Matrix g(2, 1);
  g << 0.7, -1.3;
  std::fill(grad.begin(), grad.end(), 0.0);
  mlp.backward(ParamView::of(p), cache, g, grad);
  for (int i = 0; i < 3; ++i)
    for (int o = 0; o < 2; ++o) CHECK(grad[static_cast<std::size_t>(i * 2 + o)] == doctest::Approx(g(o) * x(i)).epsilon(1e-15));
  CHECK(grad[6] == g(0));
  CHECK(grad[7] == g(1));
}

TEST_CASE("mlp backward matches central differences") {
  Mlp mlp({4, 6, 5, 2}, {Activation::elu, Activation::relu, Activation::identity});
  Parameters p(mlp.param_count());
  Rng rng(8);
  mlp.init(p.mutable_values(), rng);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix weights = random_matrix(2, 3, rng);  // loss = sum(weights .* y)
  MlpCache cache;
  mlp.forward(ParamView::of(p), x, &cache);
  std::vector<double> grad(p.size(), 0.0);
  const Matrix dx = mlp.backward(ParamView::of(p), cache, weights, grad);

  auto loss = [&](const Parameters& q, const Matrix& in) { return (mlp.forward(ParamView::of(q), in).array() * weights.array()).sum(); };
  const double h = 1e-5;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Parameters plus = p, minus = p;
    plus.mutable_values()[i] += h;
    minus.mutable_values()[i] -= h;
    CHECK(rel_err(grad[i], (loss(plus, x) - loss(minus, x)) / (2 * h)) < 1e-4);
  }
  for (int i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    CHECK(rel_err(dx(i), (loss(p, xp) - loss(p, xm)) / (2 * h)) < 1e-4);
  }
}

TEST_CASE("mlp backward refuses a stale cache") {
  Mlp mlp({2, 2}, {Activation::identity});
  Parameters p(mlp.param_count());
  MlpCache cache;
  mlp.forward(ParamView::of(p), Matrix::Ones(2, 1), &cache);
  p.mutable_values()[0] = 1.0;
  std::vector<double> grad(p.size(), 0.0);
  CHECK_THROWS_AS(mlp.backward(ParamView::of(p), cache, Matrix::Ones(2, 1), grad), std::logic_error);
  Parameters other(mlp.param_count());
  MlpCache fresh;
  mlp.forward(ParamView::of(p), Matrix::Ones(2, 1), &fresh);
  CHECK_THROWS_AS(mlp.backward(ParamView::of(other), fresh, Matrix::Ones(2, 1), grad), std::logic_error);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> g{0.0, 0.0};
  AdamState s(2);
  s.m = {0.5, 0.5};
  adam_step(s, p, g, 0.001);
  CHECK(p[0] != 1.0);  // nonzero momentum still moves
  AdamState fresh(2);
  std::vector<double> q{1.0, -2.0};
  adam_step(fresh, q, g, 0.001);
  CHECK(q == std::vector<double>{1.0, -2.0});
}

TEST_CASE("adam: first step moves by lr against the gradient sign") {
  std::vector<double> p{0.0, 0.0, 0.0};
  const std::vector<double> g{3.0, -0.2, 1e-3};
  AdamState s(3);
  adam_step(s, p, g, 0.001);
  CHECK(p[0] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.001).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(-0.001).epsilon(1e-4));
  CHECK(s.step == 1);
}

TEST_CASE("adam converges on a convex quadratic") {
  // f(x) = 0.5 * sum c_i (x_i - t_i)^2. With beta2 = 0.999 Adam is still
  // oscillating at step 100 (norm ~4e-3), so the 1e-6 check is at step 300.
  const std::vector<double> c{1.0, 4.0, 0.5};
  const std::vector<double> t{0.3, -0.2, 0.1};
  std::vector<double> x{0.0, 0.0, 0.0};
  std::vector<double> g(3);
  AdamState s(3);
  auto norm = [&] {
    double n = 0.0;
    for (std::size_t i = 0; i < 3; ++i) n += std::pow(c[i] * (x[i] - t[i]), 2);
    return std::sqrt(n);
  };
  const double start = norm();
  for (int k = 0; k < 300; ++k) {
    for (std::size_t i = 0; i < 3; ++i) g[i] = c[i] * (x[i] - t[i]);
    adam_step(s, x, g, 0.01);
    if (k == 99) CHECK(norm() < start / 50);
  }
  CHECK(norm() < 1e-6);
}

TEST_CASE("adam rejects nonfinite gradients before touching anything") {
  std::vector<double> p{1.0, 2.0};
  const std::vector<double> g{0.1, std::nan("")};
  AdamState s(2);
  CHECK_THROWS_AS(adam_step(s, p, g, 0.001), std::runtime_error);
  CHECK(p == std::vector<double>{1.0, 2.0});
  CHECK(s.step == 0);
  CHECK(s.m == std::vector<double>{0.0, 0.0});
}

TEST_CASE("gradient clipping") {
  std::vector<double> g{3.0, 4.0};
  CHECK(clip_grad_norm(g, 10.0) == 5.0);
  CHECK(g == std::vector<double>{3.0, 4.0});
  CHECK(clip_grad_norm(g, 1.0) == 5.0);
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));
}

TEST_CASE("monotonic mixer with unit hypernet outputs is an increasing sum") {
  MonotonicMixer mixer(3, 3, 4, 8);
  auto v = mixer.params().mutable_values();
  std::size_t off = 0;
  auto block = [&](const Mlp& m) {
    auto b = v.subspan(off, m.param_count());
    off += m.param_count();
    return b;
  };
  auto w1 = block(mixer.hyper_w1());
  auto b1 = block(mixer.hyper_b1());
  auto w2 = block(mixer.hyper_w2());
  auto vv = block(mixer.hyper_v());
  constant_output(mixer.hyper_w1(), w1, 1.0);
  constant_output(mixer.hyper_b1(), b1, 0.0);
  constant_output(mixer.hyper_w2(), w2, 1.0);
  constant_output(mixer.hyper_v(), vv, 0.0);

  const std::vector<double> s{0.2, -0.7, 1.1};
  const std::vector<double> q{0.5, -0.25, 1.0};
  CHECK(mixer.mix(s, q) == doctest::Approx(4 * 1.25));
  for (std::size_t a = 0; a < 3; ++a) {
    auto up = q;
    up[a] += 0.1;
    CHECK(mixer.mix(s, up) > mixer.mix(s, q));
  }
  const std::vector<double> perm{1.0, 0.5, -0.25};
  CHECK(mixer.mix(s, perm) == doctest::Approx(mixer.mix(s, q)).epsilon(1e-15));
}

TEST_CASE("monotonic mixer partials are nonnegative on random probes") {
  MonotonicMixer mixer(5, 4, 8, 16);
  Rng rng(21);
  mixer.init(rng);
  const double h = 1e-6;
  double worst = 1e300;
  for (int probe = 0; probe < 300; ++probe) {
    std::vector<double> s(5), q(4);
    for (auto& x : s) x = rng.uniform(-2, 2);
    for (auto& x : q) x = rng.uniform(-5, 5);
    for (std::size_t a = 0; a < 4; ++a) {
      auto qp = q, qm = q;
      qp[a] += h;
      qm[a] -= h;
      worst = std::min(worst, (mixer.mix(s, qp) - mixer.mix(s, qm)) / (2 * h));
    }
  }
  CHECK(worst >= -1e-8);
}

TEST_CASE("monotonic mixer gradients match central differences") {
  MonotonicMixer mixer(3, 2, 4, 5);
  Rng rng(6);
  mixer.init(rng);
  const Matrix s = random_matrix(3, 4, rng);
  const Matrix q = random_matrix(2, 4, rng);
  const Matrix w = random_matrix(1, 4, rng);
  MonotonicMixer::Cache cache;
  mixer.forward(s, q, &cache);
  std::vector<double> grad(mixer.params().size(), 0.0);
  const Matrix dq = mixer.backward(cache, w, grad);
  auto loss = [&](const MonotonicMixer& m, const Matrix& qq) { return (m.forward(s, qq).array() * w.array()).sum(); };
  const double h = 1e-5;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    MonotonicMixer plus = mixer, minus = mixer;
    plus.params().mutable_values()[i] += h;
    minus.params().mutable_values()[i] -= h;
    CHECK(rel_err(grad[i], (loss(plus, q) - loss(minus, q)) / (2 * h)) < 1e-4);
  }
  for (int i = 0; i < q.size(); ++i) {
    Matrix qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    CHECK(rel_err(dq(i), (loss(mixer, qp) - loss(mixer, qm)) / (2 * h)) < 1e-4);
  }
}

TEST_CASE("unrestricted mixer: zero weights give the bias, loop re-evaluation agrees") {
  UnrestrictedMixer mixer(2, 2, 3, 8);
  auto v = mixer.params().mutable_values();
  constant_output(mixer.mlp(), v, 0.0);
  v[v.size() - 1] = 2.5;
  const std::vector<double> s{0.1, 0.2}, q{1.0, -1.0};
  const std::vector<int> a{0, 2};
  CHECK(mixer.evaluate(s, q, a) == 2.5);

  Rng rng(3);
  mixer.init(rng);
  Matrix in(mixer.input_dim(), 1);
  mixer.fill_input(in, 0, s, q, a);
  const std::vector<double> expected_input{0.1, 0.2, 1.0, -1.0, 1, 0, 0, 0, 0, 1};
  for (int i = 0; i < mixer.input_dim(); ++i) CHECK(in(i, 0) == expected_input[static_cast<std::size_t>(i)]);
  const auto ref = reference_forward(mixer.mlp(), mixer.params().values(), expected_input);
  CHECK(std::abs(mixer.evaluate(s, q, a) - ref[0]) < 1e-12);
}

TEST_CASE("unrestricted mixer fits an XOR payoff") {
  UnrestrictedMixer mixer(1, 2, 2, 32);
  Rng rng(13);
  mixer.init(rng);
  Matrix inputs(mixer.input_dim(), 4);
  Matrix targets(1, 4);
  const std::vector<double> s{1.0}, q{0.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    const std::vector<int> a{k / 2, k % 2};
    mixer.fill_input(inputs, k, s, q, a);
    targets(0, k) = (a[0] ^ a[1]) ? 1.0 : 0.0;
  }
  AdamState opt(mixer.params().size());
  double mse = 1.0;
  for (int it = 0; it < 3000 && mse >= 1e-4; ++it) {
    MlpCache cache;
    const Matrix y = mixer.forward(inputs, &cache);
    const Matrix diff = y - targets;
    mse = diff.squaredNorm() / 4;
    std::vector<double> grad(mixer.params().size(), 0.0);
    mixer.backward(cache, 2 * diff / 4, grad);
    adam_step(opt, mixer.params().mutable_values(), grad, 0.01);
  }
  CHECK(mse < 1e-3);
}

TEST_CASE("agent net input layout") {
  AgentNet net(3, 4, 2, 8);
  Matrix in(net.input_dim(), 2);
  const std::vector<double> obs{0.5, -1.0, 0.25};
  net.fill_input(in, 0, obs, -1, 1);
  net.fill_input(in, 1, obs, 2, 0);
  const std::vector<double> c0{0.5, -1.0, 0.25, 0, 0, 0, 0, 0, 1};
  const std::vector<double> c1{0.5, -1.0, 0.25, 0, 0, 1, 0, 1, 0};
  for (int i = 0; i < net.input_dim(); ++i) {
    CHECK(in(i, 0) == c0[static_cast<std::size_t>(i)]);
    CHECK(in(i, 1) == c1[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("checkpoint round trip and missing file") {
  Checkpoint c;
  c.config_text = "[run]\nseed = 3\n";
  c.episodes = 5;
  c.env_steps = 500;
  c.train_steps = 2;
  c.blocks.push_back({"agent", {{3, 4, 2}}, {0.1, -0.2, 1e-300}});
  std::stringstream ss;
  write_checkpoint(ss, c);
  CHECK(read_checkpoint(ss) == c);
  CHECK(c.block("agent").values.size() == 3);
  CHECK_THROWS(c.block("nothing"));
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/ckpt.bin"), std::runtime_error);
}
