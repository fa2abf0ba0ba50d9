#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "macpo/episode.hpp"
#include "macpo/rng.hpp"

namespace macpo {

/// Fixed-capacity ring of whole episodes, sampled uniformly with
/// replacement. Prioritization happens in the loss, not here.
class ReplayBuffer {
 public:
  ReplayBuffer(EpisodeShape shape, std::size_t capacity);

  /// Validates and stores the episode, evicting the oldest at capacity.
  void insert(Episode episode);

  /// `batch_size` episodes drawn uniformly with replacement. Returns
  /// pointers into the buffer; they are invalidated by the next insert.
  std::vector<const Episode*> sample(std::size_t batch_size, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;

  const Episode& at(std::size_t i) const { return storage_.at(i); }
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t insert_count() const { return insert_count_; }
  const EpisodeShape& shape() const { return shape_; }

 private:
  EpisodeShape shape_;
  std::size_t capacity_;
  std::vector<Episode> storage_;
  std::size_t next_ = 0;
  std::uint64_t insert_count_ = 0;
};

}  // namespace macpo
