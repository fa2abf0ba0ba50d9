#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace macpo::nn {

/// Flat parameter block. Every mutable access bumps the generation, which
/// forward caches record so a backward pass against changed weights fails.
/// Storage is aligned so a layer's alignment depends only on its offset, and
/// with it the summation order Eigen picks.
class Parameters {
 public:
  Parameters() : id_(next_id()) {}
  explicit Parameters(std::size_t n) : values_(n, 0.0), id_(next_id()) {}
  Parameters(const Parameters& o) : values_(o.values_), id_(next_id()) {}
  Parameters& operator=(const Parameters& o) {
    values_ = o.values_;
    ++generation_;
    return *this;
  }
  Parameters(Parameters&&) noexcept = default;
  Parameters& operator=(Parameters&&) noexcept = default;

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() {
    ++generation_;
    return values_;
  }
  std::size_t size() const { return values_.size(); }
  std::uint64_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }

 private:
  static std::uint64_t next_id();

  std::vector<double, Eigen::aligned_allocator<double>> values_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
};

/// Read-only window into a block, carrying the block's identity stamp.
struct ParamView {
  std::span<const double> values;
  std::uint64_t id = 0;
  std::uint64_t generation = 0;

  static ParamView of(const Parameters& p, std::size_t offset, std::size_t count) {
    return {p.values().subspan(offset, count), p.id(), p.generation()};
  }
  static ParamView of(const Parameters& p) { return {p.values(), p.id(), p.generation()}; }
};

}  // namespace macpo::nn
