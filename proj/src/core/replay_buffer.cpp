#include "macpo/replay_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace macpo {

ReplayBuffer::ReplayBuffer(EpisodeShape shape, std::size_t capacity) : shape_(shape), capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::insert(Episode episode) {
  if (!(episode.shape() == shape_))
    throw std::invalid_argument("malformed episode: shape does not match replay buffer (agents/actions/dims)");
  episode.validate();
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(episode));
  } else {
    storage_[next_] = std::move(episode);
  }
  next_ = (next_ + 1) % capacity_;
  ++insert_count_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (storage_.empty()) throw std::runtime_error("cannot sample from an empty replay buffer");
  std::vector<std::size_t> out(batch_size);
  for (auto& i : out) i = rng.below(storage_.size());
  return out;
}

std::vector<const Episode*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<const Episode*> out;
  out.reserve(batch_size);
  for (std::size_t i : sample_indices(batch_size, rng)) out.push_back(&storage_[i]);
  return out;
}

}  // namespace macpo
