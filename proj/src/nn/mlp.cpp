#include "macpo/nn/mlp.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace macpo::nn {

std::uint64_t Parameters::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::elu: return "elu";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "elu") return Activation::elu;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

namespace {

void activate(Activation a, const Matrix& pre, Matrix& out) {
  switch (a) {
    case Activation::identity: out = pre; break;
    case Activation::relu: out = pre.cwiseMax(0.0); break;
    case Activation::elu: out = pre.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); }); break;
  }
}

void activate_in_place(Activation a, Matrix& m) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::elu: m = m.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); }); break;
  }
}

void scale_by_derivative(Activation a, const Matrix& pre, Matrix& g) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: g = (pre.array() > 0.0).select(g, 0.0); break;
    case Activation::elu: g.array() *= pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); }).array(); break;
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2 || activations_.size() + 1 != sizes_.size())
    throw std::invalid_argument("Mlp needs n+1 layer sizes for n activations");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  offsets_.assign(1, 0);
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k)
    offsets_.push_back(offsets_.back() + static_cast<std::size_t>(sizes_[k + 1]) * (sizes_[k] + 1));
}

void Mlp::init(std::span<double> params, Rng& rng) const {
  if (params.size() != param_count()) throw std::invalid_argument("Mlp::init: parameter span size mismatch");
  for (int k = 0; k < layers(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[static_cast<std::size_t>(k)]));
    for (std::size_t i = offsets_[static_cast<std::size_t>(k)]; i < offsets_[static_cast<std::size_t>(k) + 1]; ++i)
      params[i] = rng.uniform(-bound, bound);
  }
}

Eigen::Map<const Matrix> Mlp::weight(std::span<const double> params, int layer) const {
  const auto k = static_cast<std::size_t>(layer);
  return {params.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::span<const double> params, int layer) const {
  const auto k = static_cast<std::size_t>(layer);
  return {params.data() + offsets_[k] + static_cast<std::size_t>(sizes_[k + 1]) * sizes_[k], sizes_[k + 1]};
}

Matrix Mlp::forward(const ParamView& params, const Matrix& x, MlpCache* cache) const {
  if (params.values.size() != param_count()) throw std::invalid_argument("Mlp::forward: parameter count mismatch");
  if (x.rows() != input_size())
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(input_size()));
  if (cache) {
    cache->inputs.resize(static_cast<std::size_t>(layers()));
    cache->pre.resize(static_cast<std::size_t>(layers()));
    cache->param_id = params.id;
    cache->generation = params.generation;
    cache->valid = true;
  }
  Matrix h;
  for (int k = 0; k < layers(); ++k) {
    const Matrix& in = k == 0 ? x : h;
    Matrix pre(sizes_[static_cast<std::size_t>(k) + 1], x.cols());
    pre.noalias() = weight(params.values, k) * in;
    pre.colwise() += bias(params.values, k);
    const Activation act = activations_[static_cast<std::size_t>(k)];
    if (!cache) {
      activate_in_place(act, pre);
      h = std::move(pre);
      continue;
    }
    Matrix out;
    activate(act, pre, out);
    cache->inputs[static_cast<std::size_t>(k)] = k == 0 ? x : std::move(h);
    cache->pre[static_cast<std::size_t>(k)] = std::move(pre);
    h = std::move(out);
  }
  return h;
}

Matrix Mlp::backward(const ParamView& params, const MlpCache& cache, const Matrix& grad_out,
                     std::span<double> grad) const {
  if (!cache.valid || cache.param_id != params.id || cache.generation != params.generation ||
      cache.pre.size() != static_cast<std::size_t>(layers()))
    throw std::logic_error("Mlp::backward: cache is stale or from another parameter block");
  if (grad.size() != param_count()) throw std::invalid_argument("Mlp::backward: gradient span size mismatch");
  if (grad_out.rows() != output_size() || grad_out.cols() != cache.pre.back().cols())
    throw std::invalid_argument("Mlp::backward: output gradient shape mismatch");
  Matrix g = grad_out;
  for (int k = layers() - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    scale_by_derivative(activations_[ku], cache.pre[ku], g);
    Eigen::Map<Matrix> dW(grad.data() + offsets_[ku], sizes_[ku + 1], sizes_[ku]);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + offsets_[ku] + static_cast<std::size_t>(sizes_[ku + 1]) * sizes_[ku],
                                   sizes_[ku + 1]);
    // Products go through aligned temporaries: Eigen's kernels pick their
    // summation order by the alignment of the destination, and grad is a
    // plain std::vector.
    const Matrix w_grad = g * cache.inputs[ku].transpose();
    const Eigen::VectorXd b_grad = g.rowwise().sum();
    dW += w_grad;
    db += b_grad;
    g = weight(params.values, k).transpose() * g;
  }
  return g;
}

std::vector<double> Mlp::forward(const ParamView& params, std::span<const double> x) const {
  Matrix in = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  Matrix out = forward(params, in, nullptr);
  return {out.data(), out.data() + out.size()};
}

}  // namespace macpo::nn
