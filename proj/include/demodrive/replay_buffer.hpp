#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "demodrive/sim.hpp"

namespace demodrive {

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
  bool is_demo = false;

  bool operator==(const Transition&) const = default;
};

// Experience store with two regions: demonstrations, kept for the buffer's
// whole lifetime, and a FIFO ring of `capacity` agent transitions. Sampling is
// uniform over the union.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity = 100'000, std::uint64_t seed = 0);

  // Throws ArgumentError when the reward lies outside [0, 1].
  void add(const Transition& t);

  std::size_t size() const noexcept { return demos_.size() + ring_.size(); }
  std::size_t demo_count() const noexcept { return demos_.size(); }
  std::size_t agent_count() const noexcept { return ring_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

  // Index 0..demo_count()-1 are demonstrations; the rest are agent transitions
  // from oldest to newest.
  const Transition& at(std::size_t index) const;

  std::size_t sample_index();
  std::vector<std::size_t> sample_indices(std::size_t count);

private:
  std::size_t capacity_;
  std::vector<Transition> demos_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // oldest ring entry once the ring is full
  std::mt19937_64 rng_;
};

}  // namespace demodrive
