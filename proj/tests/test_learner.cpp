#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "pfrl/learner.hpp"
#include "pfrl/potential_field.hpp"
#include "support/compare.hpp"
#include "support/finite_diff.hpp"
#include "support/toy_mdp.hpp"

using namespace pfrl;
using pfrl::testing::bit_equal;
using pfrl::testing::bundles_bit_equal;
using pfrl::testing::params_bit_equal;
using pfrl::testing::relative_error;

namespace {

HyperParams small_hyper() {
  HyperParams h;
  h.hidden_sizes = {8, 8};
  h.batch_size = 4;
  h.buffer_capacity = 64;
  h.warmup_steps = 0;
  h.update_every = 1;
  return h;
}

PotentialFieldSpec goal_field(Vec2 goal) {
  PotentialFieldSpec spec;
  spec.goal_points = {goal};
  return spec;
}

std::vector<Transition> random_batch(int n, int obs_dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-0.9, 0.9);
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  std::vector<Transition> batch;
  for (int i = 0; i < n; ++i) {
    Transition t;
    for (int d = 0; d < obs_dim; ++d) t.obs.push_back(coord(rng));
    t.action = {act(rng), act(rng)};
    t.reward = i % 3 == 0 ? 10.0 : 0.0;
    for (int d = 0; d < obs_dim; ++d) t.next_obs.push_back(coord(rng));
    t.done = i % 4 == 0;
    t.raw_state_pos = Vec2{t.obs[0], t.obs[1]};
    t.pf_spec_snapshot = goal_field(Vec2{coord(rng), coord(rng)});
    batch.push_back(std::move(t));
  }
  return batch;
}

}  // namespace

TEST_CASE("select_action") {
  const HyperParams hyper = small_hyper();
  const AgentLearner learner = make_learner(Algo::kDdpg, 8, 2, hyper, 5);
  std::vector<double> obs(8, 0.3);
  std::mt19937_64 rng(1);

  SUBCASE("greedy action is the clamped actor output") {
    const std::vector<double> raw = forward(learner.actor, obs);
    const std::vector<double> a = select_action(learner, obs, false, rng);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i] == std::clamp(raw[i], -1.0, 1.0));
  }
  SUBCASE("zero noise exploration equals greedy") {
    AgentLearner quiet = make_learner(Algo::kDdpg, 8, 2, hyper, 5);
    quiet.hyper.noise_sigma = 0.0;
    const std::vector<double> a = select_action(quiet, obs, true, rng);
    const std::vector<double> b = select_action(quiet, obs, false, rng);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(select_action(learner, std::vector<double>(3, 0.0), false, rng),
                    std::invalid_argument);
  }
  SUBCASE("stochastic sampling is centred on the actor output") {
    HyperParams h = small_hyper();
    h.noise_sigma = 0.2;
    const AgentLearner pi = make_learner(Algo::kStochasticAc2, 8, 2, h, 5);
    const std::vector<double> mean = forward(pi.actor, obs);
    constexpr int kSamples = 10000;
    double sum_x = 0.0, sum_y = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const std::vector<double> a = select_action(pi, obs, true, rng);
      sum_x += a[0];
      sum_y += a[1];
    }
    const double tol = 3.0 * h.noise_sigma / std::sqrt(static_cast<double>(kSamples));
    CHECK(std::fabs(sum_x / kSamples - mean[0]) <= tol);
    CHECK(std::fabs(sum_y / kSamples - mean[1]) <= tol);
  }
}

TEST_CASE("beta = 1 reproduces the plain DDPG actor gradient bitwise") {
  HyperParams hyper = small_hyper();
  hyper.beta = 1.0;
  const AgentLearner guided = make_learner(Algo::kPgddpg, 6, 2, hyper, 42);
  const AgentLearner plain = make_learner(Algo::kDdpg, 6, 2, hyper, 42);
  REQUIRE(params_bit_equal(guided.actor, plain.actor));
  REQUIRE(params_bit_equal(guided.critic, plain.critic));

  std::mt19937_64 rng(10);
  const std::vector<Transition> batch = random_batch(16, 6, rng);
  CHECK(bundles_bit_equal(blended_actor_gradient(guided, batch),
                          blended_actor_gradient(plain, batch)));
}

TEST_CASE("beta = 0 gradient vanishes when the actor follows the force") {
  HyperParams hyper = small_hyper();
  hyper.beta = 0.0;
  AgentLearner learner = make_learner(Algo::kPgddpg, 4, 2, hyper, 3);
  // constant actor output (0.5, 0): zero weights, output bias atanh(0.5) on x
  learner.actor = zero_mlp(learner.actor.spec);
  learner.actor.biases.back() = {std::atanh(0.5), 0.0};

  // field force (1, 0) at s = (0, 0): xi = 1, goal one unit along +x
  Transition t;
  t.obs = {0.0, 0.0, 0.0, 0.0};
  t.action = {0.5, 0.0};
  t.next_obs = t.obs;
  t.raw_state_pos = Vec2{0.0, 0.0};
  t.pf_spec_snapshot = goal_field(Vec2{1.0, 0.0});

  const GradientBundle g = blended_actor_gradient(learner, {t});
  for (const auto& layer : g.weight_grads)
    for (double v : layer) CHECK(v == 0.0);
  for (const auto& layer : g.bias_grads)
    for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("actor gradient is linear in beta") {
  auto learner_with_beta = [](double beta) {
    HyperParams hyper;
    hyper.hidden_sizes = {8, 8};
    hyper.beta = beta;
    return make_learner(Algo::kPgddpg, 6, 2, hyper, 2024);
  };
  const AgentLearner g0 = learner_with_beta(0.0);
  const AgentLearner g1 = learner_with_beta(1.0);
  const AgentLearner gmid = learner_with_beta(0.5);

  std::mt19937_64 rng(77);
  const std::vector<Transition> batch = random_batch(12, 6, rng);
  const GradientBundle b0 = blended_actor_gradient(g0, batch);
  const GradientBundle b1 = blended_actor_gradient(g1, batch);
  const GradientBundle bm = blended_actor_gradient(gmid, batch);

  for (std::size_t l = 0; l < bm.weight_grads.size(); ++l)
    for (std::size_t i = 0; i < bm.weight_grads[l].size(); ++i) {
      const double mixed = 0.5 * b0.weight_grads[l][i] + 0.5 * b1.weight_grads[l][i];
      const double scale =
          std::max({1.0, std::fabs(mixed), std::fabs(bm.weight_grads[l][i])});
      CHECK(std::fabs(bm.weight_grads[l][i] - mixed) <= 1e-12 * scale);
    }
}

TEST_CASE("field scaling scales the beta = 0 gradient exactly") {
  HyperParams hyper = small_hyper();
  hyper.beta = 0.0;
  const AgentLearner learner = make_learner(Algo::kPgddpg, 6, 2, hyper, 11);

  std::mt19937_64 rng(13);
  std::vector<Transition> batch = random_batch(10, 6, rng);
  const GradientBundle base = blended_actor_gradient(learner, batch);

  for (Transition& t : batch) {
    t.pf_spec_snapshot.xi *= 2.0;
    t.pf_spec_snapshot.eta *= 2.0;
  }
  const GradientBundle scaled = blended_actor_gradient(learner, batch);
  for (std::size_t l = 0; l < base.weight_grads.size(); ++l)
    for (std::size_t i = 0; i < base.weight_grads[l].size(); ++i)
      CHECK(bit_equal(scaled.weight_grads[l][i], 2.0 * base.weight_grads[l][i]));
}

TEST_CASE("blended gradient rejects empty batches") {
  const AgentLearner learner = make_learner(Algo::kPgddpg, 4, 2, small_hyper(), 1);
  CHECK_THROWS_AS(blended_actor_gradient(learner, {}), std::invalid_argument);
}

TEST_CASE("sarsa critic update") {
  HyperParams hyper = small_hyper();
  hyper.hidden_sizes = {1};
  AgentLearner learner = make_learner(Algo::kSarsaAc2, 2, 2, hyper, 9);

  SUBCASE("terminal TD error is the raw reward when Q is zero") {
    learner.critic = zero_mlp(learner.critic.spec);
    Transition t;
    t.obs = {1.0, 0.0};
    t.action = {1.0, 0.0};
    t.reward = 10.0;
    t.next_obs = {0.0, 1.0};
    t.done = true;
    CHECK(sarsa_critic_update(learner, t) == 10.0);
  }
  SUBCASE("bootstrapped zero TD error") {
    // pass-through critic: Q = obs[0] for nonnegative inputs
    learner.critic = zero_mlp(learner.critic.spec);
    learner.critic.weights[0][0] = 1.0;  // hidden unit reads obs[0]
    learner.critic.weights[1][0] = 1.0;  // output reads the hidden unit
    learner.hyper.gamma1 = 0.99;
    Transition t;
    t.obs = {0.99, 0.0};
    t.action = {1.0, 0.0};
    t.reward = 0.0;
    t.next_obs = {1.0, 0.0};
    t.next_action = std::vector<double>{1.0, 0.0};
    t.done = false;
    CHECK(sarsa_critic_update(learner, t) == 0.0);
  }
  SUBCASE("missing next action on a non-terminal transition throws") {
    Transition t;
    t.obs = {1.0, 0.0};
    t.action = {1.0, 0.0};
    t.next_obs = {0.0, 1.0};
    t.done = false;
    CHECK_THROWS_AS(sarsa_critic_update(learner, t), std::invalid_argument);
  }
  SUBCASE("zero learning rate never changes the critic") {
    learner.hyper.critic_lr = 0.0;
    const MlpParams before = learner.critic;
    std::mt19937_64 rng(4);
    for (const Transition& t : random_batch(20, 2, rng)) {
      Transition with_next = t;
      with_next.next_action = std::vector<double>{0.0, 0.5};
      sarsa_critic_update(learner, with_next);
    }
    CHECK(params_bit_equal(before, learner.critic));
  }
}

TEST_CASE("sarsa critic converges to the analytic Q on a toy MDP") {
  testing::ToyMdp mdp;
  const std::array<double, 4> expected = mdp.analytic_cycle_q();

  HyperParams hyper;
  hyper.hidden_sizes = {32};
  hyper.gamma1 = mdp.gamma;
  hyper.critic_lr = 0.02;
  AgentLearner learner = make_learner(Algo::kSarsaAc2, 2, 2, hyper, 123);

  for (int update = 0; update < 10000; ++update) {
    const int i = update % 4;
    const auto [s, a] = mdp.cycle[i];
    const auto [sn, an] = mdp.cycle[(i + 1) % 4];
    Transition t;
    t.obs = mdp.obs(s);
    t.action = mdp.action_vec(a);
    t.reward = mdp.reward(s, a);
    t.next_obs = mdp.obs(sn);
    t.next_action = mdp.action_vec(an);
    t.done = false;
    sarsa_critic_update(learner, t);
  }

  for (int i = 0; i < 4; ++i) {
    const auto [s, a] = mdp.cycle[i];
    std::vector<double> input = mdp.obs(s);
    const std::vector<double> av = mdp.action_vec(a);
    input.insert(input.end(), av.begin(), av.end());
    CHECK(std::fabs(forward(learner.critic, input)[0] - expected[i]) <= 1e-2);
  }
}

TEST_CASE("ddpg critic update") {
  HyperParams hyper = small_hyper();
  AgentLearner learner = make_learner(Algo::kPgddpg, 6, 2, hyper, 21);
  std::mt19937_64 rng(3);

  SUBCASE("terminal batch with zero critic has target exactly the reward") {
    learner.critic = zero_mlp(learner.critic.spec);
    learner.critic_target = learner.critic;
    std::vector<Transition> batch = random_batch(8, 6, rng);
    for (Transition& t : batch) {
      t.done = true;
      t.reward = 10.0;
    }
    for (double y : ddpg_targets(learner, batch)) CHECK(y == 10.0);
    const auto [loss, grads] = ddpg_critic_loss_gradient(learner, batch);
    CHECK(loss == doctest::Approx(100.0));
  }
  SUBCASE("tau = 1 snaps the targets onto the online networks") {
    learner.hyper.tau = 1.0;
    const std::vector<Transition> batch = random_batch(8, 6, rng);
    ddpg_critic_update(learner, batch);
    CHECK(params_bit_equal(learner.critic_target, learner.critic));
    CHECK(params_bit_equal(learner.actor_target, learner.actor));
  }
  SUBCASE("loss gradient matches finite differences") {
    const std::vector<Transition> batch = random_batch(8, 6, rng);
    const std::vector<double> targets = ddpg_targets(learner, batch);
    const auto [loss, grads] = ddpg_critic_loss_gradient(learner, batch);

    auto loss_of = [&](const MlpParams& critic) {
      double acc = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<double> input = batch[i].obs;
        input.insert(input.end(), batch[i].action.begin(), batch[i].action.end());
        const double err = forward(critic, input)[0] - targets[i];
        acc += err * err / static_cast<double>(batch.size());
      }
      return acc;
    };

    const double step = 1e-5;
    std::uniform_int_distribution<std::size_t> pick_layer(0, learner.critic.weights.size() - 1);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t l = pick_layer(rng);
      std::uniform_int_distribution<std::size_t> pick(0, learner.critic.weights[l].size() - 1);
      const std::size_t i = pick(rng);
      MlpParams plus = learner.critic, minus = learner.critic;
      plus.weights[l][i] += step;
      minus.weights[l][i] -= step;
      const double fd = (loss_of(plus) - loss_of(minus)) / (2.0 * step);
      CHECK(relative_error(grads.weight_grads[l][i], fd) <= 1e-4);
    }
  }
  SUBCASE("empty batch throws") {
    CHECK_THROWS_AS(ddpg_critic_update(learner, {}), std::invalid_argument);
  }
}

TEST_CASE("stochastic update") {
  HyperParams hyper = small_hyper();
  hyper.noise_sigma = 0.2;

  SUBCASE("beta = 1 with zero advantage leaves the actor untouched") {
    hyper.beta = 1.0;
    AgentLearner learner = make_learner(Algo::kStochasticAc2, 4, 2, hyper, 31);
    learner.critic = zero_mlp(learner.critic.spec);  // V = 0 everywhere
    const MlpParams before = learner.actor;
    Transition t;
    t.obs = {0.1, 0.2, 0.3, 0.4};
    t.action = {0.5, -0.5};
    t.reward = 0.0;
    t.next_obs = {0.4, 0.3, 0.2, 0.1};
    t.done = false;
    t.raw_state_pos = Vec2{0.1, 0.2};
    t.pf_spec_snapshot = goal_field(Vec2{0.9, 0.9});
    stochastic_update(learner, t);
    CHECK(params_bit_equal(before, learner.actor));
  }
  SUBCASE("beta = 0 with a force-aligned action leaves the actor untouched") {
    hyper.beta = 0.0;
    AgentLearner learner = make_learner(Algo::kStochasticAc2, 4, 2, hyper, 31);
    const MlpParams before = learner.actor;
    Transition t;
    t.obs = {0.0, 0.0, 0.0, 0.0};
    t.action = {0.5, 0.0};  // parallel to the force (1, 0)
    t.reward = 3.0;
    t.next_obs = {0.1, 0.1, 0.1, 0.1};
    t.done = false;
    t.raw_state_pos = Vec2{0.0, 0.0};
    t.pf_spec_snapshot = goal_field(Vec2{1.0, 0.0});
    stochastic_update(learner, t);
    CHECK(params_bit_equal(before, learner.actor));
  }
  SUBCASE("sampled score averages to zero") {
    AgentLearner learner = make_learner(Algo::kStochasticAc2, 4, 2, hyper, 31);
    const std::vector<double> obs = {0.05, -0.1, 0.2, 0.0};
    const std::vector<double> mean = forward(learner.actor, obs);
    std::mt19937_64 rng(8);
    constexpr int kSamples = 100000;
    double sx = 0.0, sy = 0.0;
    const double sigma = hyper.noise_sigma;
    for (int i = 0; i < kSamples; ++i) {
      const std::vector<double> a = select_action(learner, obs, true, rng);
      sx += (a[0] - mean[0]) / (sigma * sigma);
      sy += (a[1] - mean[1]) / (sigma * sigma);
    }
    const double tol = 4.0 * (1.0 / sigma) / std::sqrt(static_cast<double>(kSamples));
    CHECK(std::fabs(sx / kSamples) <= tol);
    CHECK(std::fabs(sy / kSamples) <= tol);
  }
  SUBCASE("zero sigma is rejected") {
    hyper.noise_sigma = 0.2;
    AgentLearner learner = make_learner(Algo::kStochasticAc2, 4, 2, hyper, 31);
    learner.hyper.noise_sigma = 0.0;
    Transition t;
    t.obs = {0.0, 0.0, 0.0, 0.0};
    t.action = {0.1, 0.1};
    t.next_obs = t.obs;
    t.raw_state_pos = Vec2{};
    t.pf_spec_snapshot = goal_field(Vec2{1.0, 0.0});
    CHECK_THROWS_AS(stochastic_update(learner, t), std::invalid_argument);
  }
}

TEST_CASE("replay learning keeps parameters finite under fuzzing") {
  HyperParams hyper = small_hyper();
  hyper.batch_size = 8;
  AgentLearner learner = make_learner(Algo::kPgddpg, 6, 2, hyper, 55);
  std::mt19937_64 rng(56);
  for (const Transition& t : random_batch(1000, 6, rng)) learner_observe(learner, t);
  CHECK(learner_finite(learner));
}

TEST_CASE("critic weights must sum to one") {
  HyperParams hyper = small_hyper();
  AgentLearner learner = make_learner(Algo::kPgddpg, 4, 2, hyper, 5);
  REQUIRE(learner.critics.size() == 2);
  CHECK(learner.critics[0].weight + learner.critics[1].weight == doctest::Approx(1.0));
  CHECK(learner.critics[0].discount == hyper.gamma1);
  CHECK(learner.critics[1].discount == hyper.gamma2);
}

TEST_CASE("updates on one learner never touch another") {
  HyperParams hyper = small_hyper();
  std::mt19937_64 rng(70);
  const std::vector<Transition> stream = random_batch(60, 6, rng);

  AgentLearner a = make_learner(Algo::kPgddpg, 6, 2, hyper, 1);
  AgentLearner b1 = make_learner(Algo::kPgddpg, 6, 2, hyper, 2);
  AgentLearner b2 = make_learner(Algo::kPgddpg, 6, 2, hyper, 2);

  for (const Transition& t : stream) learner_observe(b1, t);
  // interleave updates and arbitrary perturbations of the unrelated learner
  for (const Transition& t : stream) {
    learner_observe(a, t);
    a.actor.weights[0][0] += 0.5;
    learner_observe(b2, t);
  }
  CHECK(params_bit_equal(b1.actor, b2.actor));
  CHECK(params_bit_equal(b1.critic, b2.critic));
}
