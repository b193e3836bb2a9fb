#include "pfrl/learner.hpp"

#include <cmath>
#include <stdexcept>

#include "pfrl/potential_field.hpp"

namespace pfrl {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::kDdpg: return "ddpg";
    case Algo::kPgddpg: return "pgddpg";
    case Algo::kSarsaAc2: return "sarsa_ac2";
    case Algo::kStochasticAc2: return "stochastic_ac2";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(CriticKind k) {
  return k == CriticKind::kRewardQ ? "reward_q" : "potential_field";
}

std::string to_string(OptimizerKind o) {
  return o == OptimizerKind::kSgd ? "sgd" : "adam";
}

Algo algo_from_string(const std::string& s) {
  if (s == "ddpg") return Algo::kDdpg;
  if (s == "pgddpg") return Algo::kPgddpg;
  if (s == "sarsa_ac2") return Algo::kSarsaAc2;
  if (s == "stochastic_ac2") return Algo::kStochasticAc2;
  throw std::invalid_argument("unknown algorithm: " + s);
}

CriticKind critic_kind_from_string(const std::string& s) {
  if (s == "reward_q") return CriticKind::kRewardQ;
  if (s == "potential_field") return CriticKind::kPotentialField;
  throw std::invalid_argument("unknown critic kind: " + s);
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer: " + s);
}

void HyperParams::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("hyper: beta out of [0,1]");
  if (!(gamma1 >= 0.0 && gamma1 < 1.0)) throw std::invalid_argument("hyper: gamma1 out of [0,1)");
  if (!(gamma2 >= 0.0 && gamma2 < 1.0)) throw std::invalid_argument("hyper: gamma2 out of [0,1)");
  if (!(actor_lr > 0.0)) throw std::invalid_argument("hyper: actor_lr must be positive");
  if (!(critic_lr > 0.0)) throw std::invalid_argument("hyper: critic_lr must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("hyper: tau out of (0,1]");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("hyper: noise_sigma must be >= 0");
  if (batch_size <= 0) throw std::invalid_argument("hyper: batch_size must be positive");
  if (buffer_capacity <= 0) throw std::invalid_argument("hyper: buffer_capacity must be positive");
  if (warmup_steps < 0) throw std::invalid_argument("hyper: warmup_steps must be >= 0");
  if (update_every <= 0) throw std::invalid_argument("hyper: update_every must be positive");
  for (int h : hidden_sizes)
    if (h <= 0) throw std::invalid_argument("hyper: hidden sizes must be positive");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

MlpSpec actor_spec(int obs_dim, int act_dim, const HyperParams& hyper) {
  MlpSpec spec;
  spec.layer_sizes.push_back(obs_dim);
  for (int h : hyper.hidden_sizes) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(act_dim);
  spec.hidden_activation = Activation::kRelu;
  spec.output_activation = OutputActivation::kTanh;
  return spec;
}

MlpSpec critic_spec(Algo mode, int obs_dim, int act_dim, const HyperParams& hyper) {
  MlpSpec spec;
  const int in = mode == Algo::kStochasticAc2 ? obs_dim : obs_dim + act_dim;
  spec.layer_sizes.push_back(in);
  for (int h : hyper.hidden_sizes) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(1);
  spec.hidden_activation = Activation::kRelu;
  spec.output_activation = OutputActivation::kIdentity;
  return spec;
}

std::vector<double> concat_obs_action(std::span<const double> obs, std::span<const double> act) {
  std::vector<double> input;
  input.reserve(obs.size() + act.size());
  input.insert(input.end(), obs.begin(), obs.end());
  input.insert(input.end(), act.begin(), act.end());
  return input;
}

bool replay_mode(Algo mode) { return mode == Algo::kDdpg || mode == Algo::kPgddpg; }

void check_critic_weights(const std::vector<CriticHandle>& critics) {
  double sum = 0.0;
  for (const CriticHandle& c : critics) {
    if (c.weight < 0.0) throw std::invalid_argument("critic weights must be nonnegative");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("critic weights must sum to 1");
}

}  // namespace

AgentLearner make_learner(Algo mode, int obs_dim, int act_dim, const HyperParams& hyper,
                          std::uint64_t seed) {
  hyper.validate();
  if (obs_dim <= 0 || act_dim <= 0)
    throw std::invalid_argument("make_learner: dimensions must be positive");

  AgentLearner learner{
      .mode = mode,
      .hyper = hyper,
      .obs_dim = obs_dim,
      .act_dim = act_dim,
      .actor = init_mlp(actor_spec(obs_dim, act_dim, hyper), mix_seed(seed, 1)),
      .actor_target = {},
      .critic = init_mlp(critic_spec(mode, obs_dim, act_dim, hyper), mix_seed(seed, 2)),
      .critic_target = {},
      .critics = {},
      .actor_opt = {},
      .critic_opt = {},
      .buffer = ReplayBuffer(static_cast<std::size_t>(hyper.buffer_capacity), mix_seed(seed, 3)),
  };
  learner.actor_target = learner.actor;
  learner.critic_target = learner.critic;
  learner.actor_opt = make_adam_state(learner.actor);
  learner.critic_opt = make_adam_state(learner.critic);

  if (mode == Algo::kDdpg) {
    learner.critics = {{CriticKind::kRewardQ, 1.0, hyper.gamma1}};
  } else {
    learner.critics = {{CriticKind::kRewardQ, hyper.beta, hyper.gamma1},
                       {CriticKind::kPotentialField, 1.0 - hyper.beta, hyper.gamma2}};
  }
  check_critic_weights(learner.critics);
  return learner;
}

std::vector<double> select_action(const AgentLearner& learner, std::span<const double> obs,
                                  bool explore, std::mt19937_64& rng) {
  if (static_cast<int>(obs.size()) != learner.obs_dim)
    throw std::invalid_argument("select_action: observation dimension mismatch");

  std::vector<double> action = forward(learner.actor, obs);
  const double sigma = learner.hyper.noise_sigma;
  if (explore && sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& a : action) a += noise(rng);
  }
  for (double& a : action) a = std::clamp(a, -1.0, 1.0);
  return action;
}

GradientBundle blended_actor_gradient(const AgentLearner& learner,
                                      const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("blended_actor_gradient: empty batch");
  if (learner.mode == Algo::kStochasticAc2)
    throw std::logic_error("blended_actor_gradient: not defined for the stochastic mode");

  GradientBundle total = zero_gradients(learner.actor.spec);
  std::vector<double> upstream_q(1, 1.0);

  for (const Transition& t : batch) {
    if (static_cast<int>(t.obs.size()) != learner.obs_dim)
      throw std::invalid_argument("blended_actor_gradient: observation dimension mismatch");
    const std::vector<double> a = forward(learner.actor, t.obs);
    std::vector<double> g_a(a.size(), 0.0);

    for (const CriticHandle& handle : learner.critics) {
      if (handle.weight == 0.0) continue;
      if (handle.kind == CriticKind::kRewardQ) {
        const std::vector<double> input = concat_obs_action(t.obs, a);
        const std::vector<double> in_grad = input_gradient(learner.critic, input, upstream_q);
        for (std::size_t i = 0; i < g_a.size(); ++i)
          g_a[i] += handle.weight * in_grad[learner.obs_dim + i];
      } else {
        if (a.size() != 2)
          throw std::logic_error("potential-field critic requires 2-D actions");
        const Vec2 g_pf =
            pf_action_gradient(t.pf_spec_snapshot, t.raw_state_pos, Vec2{a[0], a[1]});
        g_a[0] += handle.weight * g_pf.x;
        g_a[1] += handle.weight * g_pf.y;
      }
    }
    accumulate_backward(learner.actor, t.obs, g_a, total);
  }
  scale_gradients(total, 1.0 / static_cast<double>(batch.size()));
  return total;
}

double sarsa_critic_update(AgentLearner& learner, const Transition& t) {
  if (learner.mode != Algo::kSarsaAc2)
    throw std::logic_error("sarsa_critic_update: learner is not in sarsa_ac2 mode");
  if (!t.done && !t.next_action.has_value())
    throw std::invalid_argument("sarsa_critic_update: next_action missing");

  const std::vector<double> input_sa = concat_obs_action(t.obs, t.action);
  const double q_sa = forward(learner.critic, input_sa)[0];
  double q_next = 0.0;
  if (!t.done) {
    const std::vector<double> input_next = concat_obs_action(t.next_obs, *t.next_action);
    q_next = forward(learner.critic, input_next)[0];
  }
  const double delta = t.reward + learner.hyper.gamma1 * q_next - q_sa;

  GradientBundle grads = backward(learner.critic, input_sa, std::vector<double>{1.0});
  scale_gradients(grads, delta);
  learner.critic =
      apply_gradient_step(learner.critic, grads, learner.hyper.critic_lr, StepDirection::kAscent);
  return delta;
}

std::vector<double> ddpg_targets(const AgentLearner& learner,
                                 const std::vector<Transition>& batch) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition& t : batch) {
    double y = t.reward;
    if (!t.done) {
      const std::vector<double> a_next = forward(learner.actor_target, t.next_obs);
      const std::vector<double> input = concat_obs_action(t.next_obs, a_next);
      y += learner.hyper.gamma1 * forward(learner.critic_target, input)[0];
    }
    targets.push_back(y);
  }
  return targets;
}

std::pair<double, GradientBundle> ddpg_critic_loss_gradient(const AgentLearner& learner,
                                                            const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("ddpg_critic_loss_gradient: empty batch");
  const std::vector<double> targets = ddpg_targets(learner, batch);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  GradientBundle grads = zero_gradients(learner.critic.spec);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double> input = concat_obs_action(batch[i].obs, batch[i].action);
    const double q = forward(learner.critic, input)[0];
    const double err = q - targets[i];
    loss += err * err * inv_n;
    const std::vector<double> upstream(1, 2.0 * err * inv_n);
    accumulate_backward(learner.critic, input, upstream, grads);
  }
  return {loss, std::move(grads)};
}

double ddpg_critic_update(AgentLearner& learner, const std::vector<Transition>& batch) {
  if (!replay_mode(learner.mode))
    throw std::logic_error("ddpg_critic_update: learner is not in a replay mode");
  auto [loss, grads] = ddpg_critic_loss_gradient(learner, batch);
  if (learner.hyper.optimizer == OptimizerKind::kAdam)
    learner.critic = adam_step(learner.critic, grads, learner.critic_opt, learner.hyper.critic_lr,
                               StepDirection::kDescent);
  else
    learner.critic = apply_gradient_step(learner.critic, grads, learner.hyper.critic_lr,
                                         StepDirection::kDescent);
  learner.critic_target = soft_update(learner.critic_target, learner.critic, learner.hyper.tau);
  learner.actor_target = soft_update(learner.actor_target, learner.actor, learner.hyper.tau);
  return loss;
}

void stochastic_update(AgentLearner& learner, const Transition& t) {
  if (learner.mode != Algo::kStochasticAc2)
    throw std::logic_error("stochastic_update: learner is not in stochastic_ac2 mode");
  const double sigma = learner.hyper.noise_sigma;
  if (!(sigma > 0.0))
    throw std::invalid_argument("stochastic_update: noise_sigma must be positive");

  const double v_s = forward(learner.critic, t.obs)[0];
  const double v_next = t.done ? 0.0 : forward(learner.critic, t.next_obs)[0];
  const double advantage = t.reward + learner.hyper.gamma1 * v_next - v_s;

  const double q_pf = pf_action_value(t.pf_spec_snapshot, t.raw_state_pos,
                                      Vec2{t.action[0], t.action[1]});
  const double beta = learner.hyper.beta;
  const double coef = beta * advantage + (1.0 - beta) * q_pf;

  const std::vector<double> mean = forward(learner.actor, t.obs);
  std::vector<double> score_upstream(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    score_upstream[i] = (t.action[i] - mean[i]) / (sigma * sigma);
  GradientBundle actor_grads = backward(learner.actor, t.obs, score_upstream);
  scale_gradients(actor_grads, coef);
  learner.actor =
      apply_gradient_step(learner.actor, actor_grads, learner.hyper.actor_lr, StepDirection::kAscent);

  GradientBundle critic_grads = backward(learner.critic, t.obs, std::vector<double>{1.0});
  scale_gradients(critic_grads, advantage);
  learner.critic = apply_gradient_step(learner.critic, critic_grads, learner.hyper.critic_lr,
                                       StepDirection::kAscent);
}

void actor_gradient_ascent(AgentLearner& learner, const GradientBundle& grads) {
  if (learner.hyper.optimizer == OptimizerKind::kAdam)
    learner.actor = adam_step(learner.actor, grads, learner.actor_opt, learner.hyper.actor_lr,
                              StepDirection::kAscent);
  else
    learner.actor = apply_gradient_step(learner.actor, grads, learner.hyper.actor_lr,
                                        StepDirection::kAscent);
}

void learner_observe(AgentLearner& learner, Transition t) {
  if (static_cast<int>(t.obs.size()) != learner.obs_dim ||
      static_cast<int>(t.action.size()) != learner.act_dim)
    throw std::invalid_argument("learner_observe: transition dimension mismatch");
  learner.transitions_seen += 1;

  switch (learner.mode) {
    case Algo::kDdpg:
    case Algo::kPgddpg: {
      learner.buffer.push(std::move(t));
      const HyperParams& h = learner.hyper;
      if (learner.transitions_seen >= h.warmup_steps &&
          learner.transitions_seen % h.update_every == 0 &&
          learner.buffer.size() >= static_cast<std::size_t>(h.batch_size)) {
        const std::vector<Transition> batch = learner.buffer.sample(h.batch_size);
        ddpg_critic_update(learner, batch);
        actor_gradient_ascent(learner, blended_actor_gradient(learner, batch));
      }
      break;
    }
    case Algo::kSarsaAc2: {
      // Actor first (policy step, then the critic TD step), both as literal
      // single-transition learning-rate updates.
      const GradientBundle grads = blended_actor_gradient(learner, {t});
      learner.actor = apply_gradient_step(learner.actor, grads, learner.hyper.actor_lr,
                                          StepDirection::kAscent);
      sarsa_critic_update(learner, t);
      break;
    }
    case Algo::kStochasticAc2:
      stochastic_update(learner, t);
      break;
  }
}

bool learner_finite(const AgentLearner& learner) {
  return params_finite(learner.actor) && params_finite(learner.actor_target) &&
         params_finite(learner.critic) && params_finite(learner.critic_target);
}

}  // namespace pfrl
