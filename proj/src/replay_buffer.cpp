#include "pfrl/replay_buffer.hpp"

#include <stdexcept>
#include <unordered_set>

namespace pfrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t logical_index) const {
  if (logical_index >= items_.size())
    throw std::out_of_range("ReplayBuffer: index out of range");
  if (items_.size() < capacity_) return items_[logical_index];
  return items_[(head_ + logical_index) % capacity_];  // oldest first
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k) {
  if (k == 0) throw std::invalid_argument("ReplayBuffer: sample size must be positive");
  if (k > items_.size())
    throw std::invalid_argument("ReplayBuffer: sample size exceeds stored transitions");

  // Floyd's algorithm: k distinct indices in O(k) draws.
  const std::size_t n = items_.size();
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> order;
  order.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t t = dist(rng_);
    if (chosen.insert(t).second) {
      order.push_back(t);
    } else {
      chosen.insert(j);
      order.push_back(j);
    }
  }
  std::vector<Transition> batch;
  batch.reserve(k);
  for (std::size_t idx : order) batch.push_back(items_[idx]);
  return batch;
}

}  // namespace pfrl
