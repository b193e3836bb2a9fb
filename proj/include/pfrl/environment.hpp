#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pfrl/potential_field.hpp"
#include "pfrl/vec2.hpp"

namespace pfrl {

// Per-agent field composition constants. Predators attract to the prey and
// repel from fellow predators; the prey repels from every predator with a
// weak pull toward the arena center. Static extra points from the run config
// are appended to every constructed spec.
struct FieldSettings {
  double xi = 1.0;
  double eta = 0.002;
  double d0 = 0.3;
  double prey_d0 = 0.6;
  double prey_center_xi = 0.05;
  double epsilon_dist = 1e-6;
  std::vector<Vec2> goal_points;
  std::vector<Vec2> obstacle_points;
};

struct WorldConfig {
  int n_predators = 1;
  double predator_bound = 1.0;  // half-extent of the predator box
  double prey_bound = 0.8;      // half-extent of the prey box
  double predator_radius = 0.05;
  double prey_radius = 0.05;
  double max_speed = 1.0;  // shared by all agents
  double dt = 0.1;
  double damping = 0.75;  // velocity carry-over multiplier
  double accel_scale = 5.0;
  int episode_max_steps = 100;
  double capture_distance = 0.12;
  std::int64_t seed = 0;
  FieldSettings field;

  void validate() const;
};

// Agents are ordered predators first, prey last.
struct WorldState {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  int step_count = 0;
  bool done = false;
};

struct StepResult {
  std::vector<std::vector<double>> observations;
  std::vector<double> rewards;
  bool done = false;
  bool captured = false;
};

enum class AgentRole { kPredator, kPrey };

inline int n_agents(const WorldConfig& config) { return config.n_predators + 1; }
inline int prey_index(const WorldConfig& config) { return config.n_predators; }
inline AgentRole role_of(const WorldConfig& config, int agent_index) {
  return agent_index < config.n_predators ? AgentRole::kPredator : AgentRole::kPrey;
}

// Uniform non-overlapping placement within each role's box, zero velocities.
// Throws std::runtime_error when an agent cannot be placed in 1000 draws.
std::pair<WorldState, std::vector<std::vector<double>>> reset(const WorldConfig& config,
                                                              std::uint64_t rng_seed);

// Damped point-mass integration with hard wall clamps. Rewards are sparse:
// +10 per predator and -10 for the prey on the capture step, 0 otherwise.
std::pair<WorldState, StepResult> step(const WorldState& state, const WorldConfig& config,
                                       const std::vector<Vec2>& actions);

// True iff every predator is within capture_distance of the prey (closed
// boundary).
bool capture_predicate(const WorldState& state, const WorldConfig& config);

// Own position, own velocity, then relative position and velocity of every
// other agent in index order. Length 4 + 4 * (n_agents - 1).
std::vector<double> observe(const WorldState& state, const WorldConfig& config, int agent_index);

PotentialFieldSpec field_spec_for_agent(const WorldState& state, const WorldConfig& config,
                                        int agent_index, AgentRole role);

}  // namespace pfrl
