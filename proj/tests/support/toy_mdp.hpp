#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

// Two-state, two-action deterministic MDP: action 0 always leads to state 0,
// action 1 to state 1; rewards are r(s0,a0)=1, r(s0,a1)=0, r(s1,a0)=2,
// r(s1,a1)=3. The behavior is the deterministic period-4 cycle
//   (s0,a1) -> (s1,a1) -> (s1,a0) -> (s0,a0) -> ...
// which visits every state-action pair with noise-free Sarsa targets. Serves
// as the independent convergence oracle for the Sarsa critic.
namespace pfrl::testing {

struct ToyMdp {
  double gamma = 0.9;

  static std::vector<double> obs(int s) {
    return s == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  }
  static std::vector<double> action_vec(int a) {
    return a == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{-1.0, 0.0};
  }
  static int next_state(int /*s*/, int a) { return a; }
  static double reward(int s, int a) {
    constexpr double r[2][2] = {{1.0, 0.0}, {2.0, 3.0}};
    return r[s][a];
  }

  // The visited cycle as (state, action) pairs, in order.
  static constexpr std::array<std::array<int, 2>, 4> cycle = {{{0, 1}, {1, 1}, {1, 0}, {0, 0}}};

  // Closed-form Q along the cycle: Q_i = sum_k gamma^k r_{(i+k) mod 4} /
  // (1 - gamma^4). Cross-checked by fixed-point iteration.
  std::array<double, 4> analytic_cycle_q() const {
    std::array<double, 4> rewards{};
    for (int i = 0; i < 4; ++i) rewards[i] = reward(cycle[i][0], cycle[i][1]);

    std::array<double, 4> q{};
    const double denom = 1.0 - std::pow(gamma, 4.0);
    for (int i = 0; i < 4; ++i) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += std::pow(gamma, k) * rewards[(i + k) % 4];
      q[i] = acc / denom;
    }

    std::array<double, 4> it{};
    for (int sweep = 0; sweep < 500; ++sweep) {
      std::array<double, 4> next{};
      for (int i = 0; i < 4; ++i) next[i] = rewards[i] + gamma * it[(i + 1) % 4];
      it = next;
    }
    for (int i = 0; i < 4; ++i)
      if (std::fabs(it[i] - q[i]) > 1e-9)
        throw std::logic_error("toy MDP oracle self-check failed");
    return q;
  }
};

}  // namespace pfrl::testing
