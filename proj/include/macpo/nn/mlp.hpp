#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "macpo/nn/parameters.hpp"
#include "macpo/rng.hpp"

namespace macpo::nn {

using Matrix = Eigen::MatrixXd;

enum class Activation { identity, relu, elu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Activations saved by forward() for backward().
struct MlpCache {
  std::vector<Matrix> inputs;  // input of each layer (inputs[0] is x)
  std::vector<Matrix> pre;     // pre-activation of each layer
  std::uint64_t param_id = 0;
  std::uint64_t generation = 0;
  bool valid = false;
};

/// Fully-connected stack over an external flat parameter span. Layer k
/// stores W_k (out x in, column-major) followed by b_k. Batches are
/// column-per-sample matrices.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, std::vector<Activation> activations);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int layers() const { return static_cast<int>(activations_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  std::size_t param_count() const { return offsets_.back(); }

  /// PyTorch-style default: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void init(std::span<double> params, Rng& rng) const;

  Eigen::Map<const Matrix> weight(std::span<const double> params, int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::span<const double> params, int layer) const;

  /// x is input_size x N. Throws std::invalid_argument on dimension mismatch.
  Matrix forward(const ParamView& params, const Matrix& x, MlpCache* cache = nullptr) const;

  /// Accumulates parameter gradients into grad (same layout as params) and
  /// returns the input gradient. Throws std::logic_error on a stale cache.
  Matrix backward(const ParamView& params, const MlpCache& cache, const Matrix& grad_out,
                  std::span<double> grad) const;

  /// Single-sample convenience.
  std::vector<double> forward(const ParamView& params, std::span<const double> x) const;

 private:
  std::vector<int> sizes_{0};
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_{0};
};

}  // namespace macpo::nn
