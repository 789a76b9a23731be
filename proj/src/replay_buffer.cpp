#include "demodrive/replay_buffer.hpp"

#include <cmath>

#include "demodrive/errors.hpp"

namespace demodrive {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw ArgumentError("replay capacity must be positive");
}

void ReplayBuffer::add(const Transition& t) {
  if (!std::isfinite(t.reward) || t.reward < 0.0 || t.reward > 1.0) {
    throw ArgumentError("transition reward outside [0, 1]");
  }
  if (t.is_demo) {
    demos_.push_back(t);
    return;
  }
  if (ring_.size() < capacity_) {
    ring_.push_back(t);
    return;
  }
  ring_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index < demos_.size()) return demos_[index];
  index -= demos_.size();
  if (index >= ring_.size()) throw RangeError("replay index out of range");
  return ring_[(head_ + index) % ring_.size()];
}

std::size_t ReplayBuffer::sample_index() {
  if (size() == 0) throw StateError("cannot sample an empty replay buffer");
  std::uniform_int_distribution<std::size_t> dist(0, size() - 1);
  return dist(rng_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count) {
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = sample_index();
  return out;
}

}  // namespace demodrive
