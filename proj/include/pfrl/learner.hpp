#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pfrl/mlp.hpp"
#include "pfrl/replay_buffer.hpp"

namespace pfrl {

enum class Algo { kDdpg, kPgddpg, kSarsaAc2, kStochasticAc2 };
enum class CriticKind { kRewardQ, kPotentialField };
enum class OptimizerKind { kSgd, kAdam };

std::string to_string(Algo a);
std::string to_string(CriticKind k);
std::string to_string(OptimizerKind o);
Algo algo_from_string(const std::string& s);
CriticKind critic_kind_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

struct HyperParams {
  double beta = 0.5;    // reward-critic weight; 1 recovers plain DDPG
  double gamma1 = 0.99; // reward discount
  double gamma2 = 0.0;  // potential-field discount (kept at 0: q_PF is used directly)
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double tau = 0.01;
  double noise_sigma = 0.2;
  int batch_size = 128;
  int buffer_capacity = 100000;
  int warmup_steps = 1000;
  int update_every = 10;  // replay-mode update cadence, in environment steps
  OptimizerKind optimizer = OptimizerKind::kAdam;  // replay modes only
  std::vector<int> hidden_sizes = {64, 64};

  void validate() const;
};

// One entry of the weighted critic list. The artifact instantiates exactly
// {reward_q: beta, potential_field: 1 - beta}.
struct CriticHandle {
  CriticKind kind = CriticKind::kRewardQ;
  double weight = 1.0;
  double discount = 0.99;
};

struct AgentLearner {
  Algo mode = Algo::kDdpg;
  HyperParams hyper;
  int obs_dim = 0;
  int act_dim = 0;
  MlpParams actor, actor_target;
  MlpParams critic, critic_target;  // Q(s,a), or V(s) in the stochastic mode
  std::vector<CriticHandle> critics;
  AdamState actor_opt, critic_opt;
  ReplayBuffer buffer;
  std::int64_t transitions_seen = 0;
};

AgentLearner make_learner(Algo mode, int obs_dim, int act_dim, const HyperParams& hyper,
                          std::uint64_t seed);

// Deterministic modes: actor output plus optional Gaussian noise; stochastic
// mode: a draw from the Gaussian policy. Components clamped to [-1, 1].
std::vector<double> select_action(const AgentLearner& learner, std::span<const double> obs,
                                  bool explore, std::mt19937_64& rng);

// Batch-mean actor gradient: grad_theta mu(s) [ beta grad_a Q(s,a) +
// (1-beta) grad_a q_PF(s,a) ] at a = mu(s). Zero-weight critics are skipped,
// so beta = 1 reproduces the plain DDPG gradient arithmetic exactly.
GradientBundle blended_actor_gradient(const AgentLearner& learner,
                                      const std::vector<Transition>& batch);

// On-policy Sarsa step on the reward critic; returns the TD error.
double sarsa_critic_update(AgentLearner& learner, const Transition& t);

std::vector<double> ddpg_targets(const AgentLearner& learner,
                                 const std::vector<Transition>& batch);

// Mean squared TD error and its gradient in the online critic parameters,
// with targets held by the target networks.
std::pair<double, GradientBundle> ddpg_critic_loss_gradient(const AgentLearner& learner,
                                                            const std::vector<Transition>& batch);

// One critic descent step toward the target-network targets, then a soft
// update of both targets. Returns the pre-update mean squared TD error.
double ddpg_critic_update(AgentLearner& learner, const std::vector<Transition>& batch);

// Stochastic actor-critic-2 step: advantage-weighted score-function update
// of the Gaussian policy mean blended with q_PF, then the TD update of V.
void stochastic_update(AgentLearner& learner, const Transition& t);

// Ascent step on the actor through the configured optimizer (replay modes).
void actor_gradient_ascent(AgentLearner& learner, const GradientBundle& grads);

// Feed one transition and run the mode's update schedule.
void learner_observe(AgentLearner& learner, Transition t);

bool learner_finite(const AgentLearner& learner);

// Deterministic stream derivation for seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pfrl
