#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pfrl/potential_field.hpp"
#include "pfrl/vec2.hpp"

namespace pfrl {

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_obs;
  std::optional<std::vector<double>> next_action;  // Sarsa mode only
  bool done = false;
  PotentialFieldSpec pf_spec_snapshot;  // field as seen when acting
  Vec2 raw_state_pos;                   // acting agent's position at that step
};

// Fixed-capacity ring evicting oldest first. Sampling is uniform without
// replacement within a batch, seeded.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical_index) const;

  // k distinct uniformly chosen items; throws std::invalid_argument when
  // k == 0 or k > size().
  std::vector<Transition> sample(std::size_t k);

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> items_;
  std::mt19937_64 rng_;
};

}  // namespace pfrl
