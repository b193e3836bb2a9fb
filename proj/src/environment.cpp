#include "pfrl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pfrl {

void WorldConfig::validate() const {
  if (n_predators <= 0) throw std::invalid_argument("WorldConfig: n_predators must be positive");
  if (!(prey_bound < predator_bound))
    throw std::invalid_argument("WorldConfig: prey_bound must be smaller than predator_bound");
  if (!(predator_radius > 0.0) || !(prey_radius > 0.0))
    throw std::invalid_argument("WorldConfig: radii must be positive");
  if (!(max_speed > 0.0)) throw std::invalid_argument("WorldConfig: max_speed must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("WorldConfig: dt must be positive");
  if (!(damping >= 0.0 && damping < 1.0))
    throw std::invalid_argument("WorldConfig: damping must be in [0,1)");
  if (episode_max_steps <= 0)
    throw std::invalid_argument("WorldConfig: episode_max_steps must be positive");
  if (!(capture_distance > 0.0))
    throw std::invalid_argument("WorldConfig: capture_distance must be positive");
}

namespace {

double bound_of(const WorldConfig& config, int agent_index) {
  return role_of(config, agent_index) == AgentRole::kPredator ? config.predator_bound
                                                              : config.prey_bound;
}

double radius_of(const WorldConfig& config, int agent_index) {
  return role_of(config, agent_index) == AgentRole::kPredator ? config.predator_radius
                                                              : config.prey_radius;
}

}  // namespace

std::pair<WorldState, std::vector<std::vector<double>>> reset(const WorldConfig& config,
                                                              std::uint64_t rng_seed) {
  config.validate();
  std::mt19937_64 rng(rng_seed);
  const int total = n_agents(config);

  WorldState state;
  state.positions.resize(total);
  state.velocities.assign(total, Vec2{});

  for (int i = 0; i < total; ++i) {
    const double bound = bound_of(config, i);
    std::uniform_real_distribution<double> dist(-bound, bound);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Vec2 candidate{dist(rng), dist(rng)};
      placed = true;
      for (int j = 0; j < i; ++j) {
        const double min_gap = radius_of(config, i) + radius_of(config, j);
        if (distance(candidate, state.positions[j]) <= min_gap) {
          placed = false;
          break;
        }
      }
      if (placed) state.positions[i] = candidate;
    }
    if (!placed)
      throw std::runtime_error("reset: could not place agents without overlap (arena too crowded)");
  }

  std::vector<std::vector<double>> observations;
  observations.reserve(total);
  for (int i = 0; i < total; ++i) observations.push_back(observe(state, config, i));
  return {std::move(state), std::move(observations)};
}

bool capture_predicate(const WorldState& state, const WorldConfig& config) {
  const Vec2 prey = state.positions[prey_index(config)];
  for (int i = 0; i < config.n_predators; ++i)
    if (distance(state.positions[i], prey) > config.capture_distance) return false;
  return true;
}

std::pair<WorldState, StepResult> step(const WorldState& state, const WorldConfig& config,
                                       const std::vector<Vec2>& actions) {
  const int total = n_agents(config);
  if (static_cast<int>(actions.size()) != total)
    throw std::invalid_argument("step: one action per agent required");
  for (const Vec2& a : actions)
    if (!is_finite(a)) throw std::invalid_argument("step: non-finite action");
  if (state.done) throw std::logic_error("step: episode already done");

  WorldState next = state;
  for (int i = 0; i < total; ++i) {
    const Vec2 a{std::clamp(actions[i].x, -1.0, 1.0), std::clamp(actions[i].y, -1.0, 1.0)};
    Vec2 v = config.damping * state.velocities[i] + (config.dt * config.accel_scale) * a;
    const double speed = norm(v);
    if (speed > config.max_speed) v = (config.max_speed / speed) * v;

    Vec2 p = state.positions[i] + config.dt * v;
    const double bound = bound_of(config, i);
    if (p.x < -bound) { p.x = -bound; v.x = 0.0; }
    if (p.x > bound)  { p.x = bound;  v.x = 0.0; }
    if (p.y < -bound) { p.y = -bound; v.y = 0.0; }
    if (p.y > bound)  { p.y = bound;  v.y = 0.0; }

    next.velocities[i] = v;
    next.positions[i] = p;
  }
  next.step_count = state.step_count + 1;

  const bool captured = capture_predicate(next, config);
  next.done = captured || next.step_count >= config.episode_max_steps;

  StepResult result;
  result.captured = captured;
  result.done = next.done;
  result.rewards.assign(total, 0.0);
  if (captured) {
    for (int i = 0; i < config.n_predators; ++i) result.rewards[i] = 10.0;
    result.rewards[prey_index(config)] = -10.0;
  }
  result.observations.reserve(total);
  for (int i = 0; i < total; ++i) result.observations.push_back(observe(next, config, i));
  return {std::move(next), std::move(result)};
}

std::vector<double> observe(const WorldState& state, const WorldConfig& config, int agent_index) {
  const int total = n_agents(config);
  if (agent_index < 0 || agent_index >= total)
    throw std::invalid_argument("observe: agent index out of range");

  std::vector<double> obs;
  obs.reserve(4 + 4 * (total - 1));
  const Vec2 own_p = state.positions[agent_index];
  const Vec2 own_v = state.velocities[agent_index];
  obs.push_back(own_p.x);
  obs.push_back(own_p.y);
  obs.push_back(own_v.x);
  obs.push_back(own_v.y);
  for (int j = 0; j < total; ++j) {
    if (j == agent_index) continue;
    const Vec2 rel_p = state.positions[j] - own_p;
    const Vec2 rel_v = state.velocities[j] - own_v;
    obs.push_back(rel_p.x);
    obs.push_back(rel_p.y);
    obs.push_back(rel_v.x);
    obs.push_back(rel_v.y);
  }
  return obs;
}

PotentialFieldSpec field_spec_for_agent(const WorldState& state, const WorldConfig& config,
                                        int agent_index, AgentRole role) {
  if (agent_index < 0 || agent_index >= n_agents(config))
    throw std::invalid_argument("field_spec_for_agent: agent index out of range");
  if (role_of(config, agent_index) != role)
    throw std::invalid_argument("field_spec_for_agent: role does not match agent index");

  const FieldSettings& fs = config.field;
  PotentialFieldSpec spec;
  spec.eta = fs.eta;
  spec.epsilon_dist = fs.epsilon_dist;

  if (role == AgentRole::kPredator) {
    spec.xi = fs.xi;
    spec.d0 = fs.d0;
    spec.goal_points.push_back(state.positions[prey_index(config)]);
    for (int j = 0; j < config.n_predators; ++j)
      if (j != agent_index) spec.obstacle_points.push_back(state.positions[j]);
  } else {
    spec.xi = fs.prey_center_xi;
    spec.d0 = fs.prey_d0;
    spec.goal_points.push_back(Vec2{0.0, 0.0});
    for (int j = 0; j < config.n_predators; ++j)
      spec.obstacle_points.push_back(state.positions[j]);
  }
  spec.goal_points.insert(spec.goal_points.end(), fs.goal_points.begin(), fs.goal_points.end());
  spec.obstacle_points.insert(spec.obstacle_points.end(), fs.obstacle_points.begin(),
                              fs.obstacle_points.end());
  return spec;
}

}  // namespace pfrl
