#pragma once

#include <vector>

#include "pfrl/vec2.hpp"

namespace pfrl {

// Attractive/repulsive field definition: goal set, obstacle set and the
// scaling constants. A spec is a value; per-step specs are cheap to build.
struct PotentialFieldSpec {
  double xi = 1.0;            // attraction scale
  double eta = 0.002;         // repulsion scale
  double d0 = 0.3;            // repulsion influence distance
  double epsilon_dist = 1e-6; // distance floor guarding the 1/d singularity
  std::vector<Vec2> goal_points;
  std::vector<Vec2> obstacle_points;

  // Throws std::invalid_argument when a scaling constant is non-positive.
  void validate() const;
};

struct FieldEvaluation {
  double u_att = 0.0;
  double u_rep = 0.0;
  double u_total = 0.0;
  Vec2 force;  // -grad U(s)
};

// 0.5 * xi * d^2 to the nearest goal point. Throws std::runtime_error when
// the spec has no goal points.
double attractive_potential(const PotentialFieldSpec& spec, Vec2 s);

// Sum over obstacles of 0.5 * eta * (1/d - 1/d0)^2 for d <= d0, else 0.
// Distances are clamped below at epsilon_dist.
double repulsive_potential(const PotentialFieldSpec& spec, Vec2 s);

// Total potential and its analytic negative gradient.
FieldEvaluation evaluate_field(const PotentialFieldSpec& spec, Vec2 s);

// q_PF(s, a) = -U(s) * (1 - cos chi), chi the angle between the field force
// and the action. Degenerate action or force (norm <= epsilon_dist) gives 0.
double pf_action_value(const PotentialFieldSpec& spec, Vec2 s, Vec2 a);

// Analytic gradient of pf_action_value in the action argument:
//   U(s) * ( f / (|f||a|) - (f.a) a / (|f||a|^3) ).
// Degenerate norms give the zero vector.
Vec2 pf_action_gradient(const PotentialFieldSpec& spec, Vec2 s, Vec2 a);

}  // namespace pfrl
