#include "pfrl/potential_field.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pfrl {

void PotentialFieldSpec::validate() const {
  if (!(xi > 0.0)) throw std::invalid_argument("PotentialFieldSpec: xi must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("PotentialFieldSpec: eta must be > 0");
  if (!(d0 > 0.0)) throw std::invalid_argument("PotentialFieldSpec: d0 must be > 0");
  if (!(epsilon_dist > 0.0))
    throw std::invalid_argument("PotentialFieldSpec: epsilon_dist must be > 0");
}

namespace {

// Index of the goal nearest to s.
std::size_t nearest_goal(const PotentialFieldSpec& spec, Vec2 s) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.goal_points.size(); ++i) {
    const double d2 = squared_norm(s - spec.goal_points[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace

double attractive_potential(const PotentialFieldSpec& spec, Vec2 s) {
  spec.validate();
  if (spec.goal_points.empty())
    throw std::runtime_error("attractive_potential: spec has no goal points");
  const Vec2 goal = spec.goal_points[nearest_goal(spec, s)];
  return 0.5 * spec.xi * squared_norm(s - goal);
}

double repulsive_potential(const PotentialFieldSpec& spec, Vec2 s) {
  spec.validate();
  double u = 0.0;
  for (const Vec2& obs : spec.obstacle_points) {
    const double d = std::max(distance(s, obs), spec.epsilon_dist);
    if (d <= spec.d0) {
      const double gap = 1.0 / d - 1.0 / spec.d0;
      u += 0.5 * spec.eta * gap * gap;
    }
  }
  return u;
}

FieldEvaluation evaluate_field(const PotentialFieldSpec& spec, Vec2 s) {
  FieldEvaluation out;
  out.u_att = attractive_potential(spec, s);
  out.u_rep = repulsive_potential(spec, s);
  out.u_total = out.u_att + out.u_rep;

  // Attraction pulls toward the nearest goal: -grad(0.5 xi d^2) = xi (g - s).
  const Vec2 goal = spec.goal_points[nearest_goal(spec, s)];
  Vec2 force = spec.xi * (goal - s);

  // Each obstacle inside its influence radius pushes away along (s - o).
  for (const Vec2& obs : spec.obstacle_points) {
    const double d = distance(s, obs);
    if (d <= spec.epsilon_dist) continue;  // clamped region, locally flat
    if (d <= spec.d0) {
      const double gap = 1.0 / d - 1.0 / spec.d0;
      force += (spec.eta * gap / (d * d * d)) * (s - obs);
    }
  }
  out.force = force;
  return out;
}

double pf_action_value(const PotentialFieldSpec& spec, Vec2 s, Vec2 a) {
  const FieldEvaluation field = evaluate_field(spec, s);
  const double na = norm(a);
  const double nf = norm(field.force);
  if (na <= spec.epsilon_dist || nf <= spec.epsilon_dist) return 0.0;
  const double cos_chi = std::clamp(dot(field.force, a) / (nf * na), -1.0, 1.0);
  return -field.u_total * (1.0 - cos_chi);
}

Vec2 pf_action_gradient(const PotentialFieldSpec& spec, Vec2 s, Vec2 a) {
  const FieldEvaluation field = evaluate_field(spec, s);
  const Vec2 f = field.force;
  const double na = norm(a);
  const double nf = norm(f);
  if (na <= spec.epsilon_dist || nf <= spec.epsilon_dist) return Vec2{};
  const double fa = dot(f, a);
  return field.u_total * (f / (nf * na) - (fa / (nf * na * na * na)) * a);
}

}  // namespace pfrl
