#include "pfrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pfrl/checkpoint.hpp"
#include "pfrl/format.hpp"
#include "pfrl/potential_field.hpp"

namespace pfrl {

namespace fs = std::filesystem;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kOneVOne: return "one_v_one";
    case Scenario::kThreeVOnePretrained: return "three_v_one_pretrained";
    case Scenario::kThreeVOneSimultaneous: return "three_v_one_simultaneous";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(PreyPolicyKind k) {
  switch (k) {
    case PreyPolicyKind::kPretrainedCheckpoint: return "pretrained_checkpoint";
    case PreyPolicyKind::kTrainedSimultaneously: return "trained_simultaneously";
    case PreyPolicyKind::kRandom: return "random";
  }
  throw std::logic_error("unreachable");
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "one_v_one") return Scenario::kOneVOne;
  if (s == "three_v_one_pretrained") return Scenario::kThreeVOnePretrained;
  if (s == "three_v_one_simultaneous") return Scenario::kThreeVOneSimultaneous;
  throw std::invalid_argument("unknown scenario: " + s);
}

PreyPolicyKind prey_policy_from_string(const std::string& s) {
  if (s == "pretrained_checkpoint") return PreyPolicyKind::kPretrainedCheckpoint;
  if (s == "trained_simultaneously") return PreyPolicyKind::kTrainedSimultaneously;
  if (s == "random") return PreyPolicyKind::kRandom;
  throw std::invalid_argument("unknown prey policy: " + s);
}

ExperimentConfig resolve_scenario(const ExperimentConfig& config) {
  ExperimentConfig out = config;
  switch (config.scenario) {
    case Scenario::kOneVOne:
      out.world.n_predators = 1;
      break;
    case Scenario::kThreeVOnePretrained:
      out.world.n_predators = 3;
      break;
    case Scenario::kThreeVOneSimultaneous:
      out.world.n_predators = 3;
      out.prey_policy = PreyPolicyKind::kTrainedSimultaneously;
      break;
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (total_episodes <= 0)
    throw std::invalid_argument("experiment: total_episodes must be positive");
  if (eval_every < 0) throw std::invalid_argument("experiment: eval_every must be >= 0");
  if (prey_policy == PreyPolicyKind::kPretrainedCheckpoint && prey_checkpoint_path.empty())
    throw std::invalid_argument("experiment: pretrained prey policy needs prey_checkpoint_path");
  if (scenario == Scenario::kThreeVOnePretrained &&
      prey_policy == PreyPolicyKind::kTrainedSimultaneously)
    throw std::invalid_argument(
        "experiment: three_v_one_pretrained cannot train the prey simultaneously");
  world.validate();
  hyper.validate();
}

std::pair<double, double> compute_windowed_metrics(
    const std::vector<std::pair<double, bool>>& history) {
  if (history.empty())
    throw std::invalid_argument("compute_windowed_metrics: empty history");
  const std::size_t n = history.size();

  const std::size_t w200 = std::min<std::size_t>(200, n);
  std::size_t successes = 0;
  for (std::size_t i = n - w200; i < n; ++i)
    if (history[i].second) ++successes;
  const double success_rate = static_cast<double>(successes) / static_cast<double>(w200);

  const std::size_t w500 = std::min<std::size_t>(500, n);
  double reward_sum = 0.0;
  for (std::size_t i = n - w500; i < n; ++i) reward_sum += history[i].first;
  const double reward_avg = reward_sum / static_cast<double>(w500);

  return {success_rate, reward_avg};
}

std::string metrics_csv_header() {
  return "episode,reward,success,success_rate_w200,reward_avg_w500,wall_clock_s";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.episode);
  row += ',';
  row += format_double(r.episode_reward_per_predator);
  row += ',';
  row += r.success ? '1' : '0';
  row += ',';
  row += format_double(r.success_rate_w200);
  row += ',';
  row += format_double(r.reward_avg_w500);
  row += ',';
  row += format_double(r.wall_clock_s);
  return row;
}

MlpPolicy::MlpPolicy(MlpParams actor, double noise_sigma)
    : actor_(std::move(actor)), noise_sigma_(noise_sigma) {
  if (actor_.spec.output_size() != 2)
    throw std::invalid_argument("MlpPolicy: actor must produce 2-D actions");
}

Vec2 MlpPolicy::act(const WorldState&, const WorldConfig&, const std::vector<double>& obs, int,
                    std::mt19937_64& rng) {
  std::vector<double> a = forward(actor_, obs);
  if (noise_sigma_ > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma_);
    for (double& v : a) v += noise(rng);
  }
  return Vec2{std::clamp(a[0], -1.0, 1.0), std::clamp(a[1], -1.0, 1.0)};
}

Vec2 ScriptedFieldPolicy::act(const WorldState& state, const WorldConfig& config,
                              const std::vector<double>&, int agent_index, std::mt19937_64&) {
  const PotentialFieldSpec spec =
      field_spec_for_agent(state, config, agent_index, role_of(config, agent_index));
  const Vec2 force = evaluate_field(spec, state.positions[agent_index]).force;
  const double n = norm(force);
  if (n <= spec.epsilon_dist) return Vec2{};
  return force / n;
}

Vec2 RandomPolicy::act(const WorldState&, const WorldConfig&, const std::vector<double>&, int,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double x = dist(rng);
  const double y = dist(rng);
  return Vec2{x, y};
}

namespace {

// Seed stream bases; the low half carries the episode counter.
constexpr std::uint64_t kStreamEnv = 1ULL << 32;
constexpr std::uint64_t kStreamProbeEnv = 2ULL << 32;
constexpr std::uint64_t kStreamProbeRng = 3ULL << 32;
constexpr std::uint64_t kStreamEvalEnv = 4ULL << 32;
constexpr std::uint64_t kStreamEvalRng = 5ULL << 32;
constexpr std::uint64_t kStreamPredatorLearner = 100;
constexpr std::uint64_t kStreamPreyLearner = 150;
constexpr std::uint64_t kStreamPredatorRng = 200;
constexpr std::uint64_t kStreamPreyRng = 300;

class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const fs::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "episode,step,agent,px,py,vx,vy,ax,ay,reward,done\n";
  }

  void row(std::int64_t episode, int step, int agent, Vec2 p, Vec2 v, Vec2 a, double reward,
           bool done) {
    out_ << episode << ',' << step << ',' << agent << ',' << format_double(p.x) << ','
         << format_double(p.y) << ',' << format_double(v.x) << ',' << format_double(v.y) << ','
         << format_double(a.x) << ',' << format_double(a.y) << ',' << format_double(reward) << ','
         << (done ? '1' : '0') << '\n';
  }

 private:
  std::ofstream out_;
};

struct NanGuard {
  const fs::path& out_dir;

  [[noreturn]] void fail(const std::string& name, std::int64_t episode,
                         const std::string& what) const {
    if (!out_dir.empty()) {
      nlohmann::json diag;
      diag["episode"] = episode;
      diag["agent"] = name;
      diag["error"] = what;
      std::ofstream out(out_dir / "diagnostic.json");
      out << diag.dump(2) << '\n';
    }
    throw std::runtime_error("divergence: " + what + " in " + name + " at episode " +
                             std::to_string(episode));
  }

  void check(const AgentLearner& learner, const std::string& name, std::int64_t episode) const {
    if (!learner_finite(learner)) fail(name, episode, "non-finite parameters");
  }

  void check_action(const std::vector<double>& action, const std::string& name,
                    std::int64_t episode) const {
    for (double v : action)
      if (!std::isfinite(v)) fail(name, episode, "non-finite action");
  }
};

// One greedy episode with frozen policies; used for the periodic probe.
bool run_probe_episode(const WorldConfig& world, const std::vector<const MlpParams*>& actors,
                       Policy* prey_policy, const MlpParams* prey_actor, std::uint64_t env_seed,
                       std::uint64_t rng_seed) {
  auto [state, obs] = reset(world, env_seed);
  std::mt19937_64 rng(rng_seed);
  const int total = n_agents(world);
  bool captured = false;
  while (!state.done) {
    std::vector<Vec2> actions(total);
    for (int i = 0; i < world.n_predators; ++i) {
      std::vector<double> a = forward(*actors[i], obs[i]);
      actions[i] = Vec2{std::clamp(a[0], -1.0, 1.0), std::clamp(a[1], -1.0, 1.0)};
    }
    const int pi = prey_index(world);
    if (prey_actor != nullptr) {
      std::vector<double> a = forward(*prey_actor, obs[pi]);
      actions[pi] = Vec2{std::clamp(a[0], -1.0, 1.0), std::clamp(a[1], -1.0, 1.0)};
    } else {
      actions[pi] = prey_policy->act(state, world, obs[pi], pi, rng);
    }
    auto [next_state, result] = step(state, world, actions);
    captured = captured || result.captured;
    state = std::move(next_state);
    obs = std::move(result.observations);
  }
  return captured;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& raw_config, const fs::path& out_dir,
                         std::ostream* progress) {
  const ExperimentConfig config = resolve_scenario(raw_config);
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const WorldConfig& world = config.world;
  const int n_pred = world.n_predators;
  const int total = n_agents(world);
  const int pi = prey_index(world);
  const int obs_dim = 4 + 4 * n_pred;

  std::vector<AgentLearner> predators;
  predators.reserve(n_pred);
  for (int i = 0; i < n_pred; ++i)
    predators.push_back(make_learner(config.predator_algo, obs_dim, 2, config.hyper,
                                     mix_seed(config.seed, kStreamPredatorLearner + i)));

  std::optional<AgentLearner> prey_learner;
  std::unique_ptr<Policy> prey_policy;
  switch (config.prey_policy) {
    case PreyPolicyKind::kPretrainedCheckpoint: {
      const AgentLearner loaded = load_learner(config.prey_checkpoint_path, 0);
      if (loaded.actor.spec.input_size() != obs_dim)
        throw std::runtime_error("prey checkpoint observation size does not match the scenario");
      prey_policy = std::make_unique<MlpPolicy>(loaded.actor);
      break;
    }
    case PreyPolicyKind::kRandom:
      prey_policy = std::make_unique<RandomPolicy>();
      break;
    case PreyPolicyKind::kTrainedSimultaneously:
      prey_learner = make_learner(config.prey_algo, obs_dim, 2, config.hyper,
                                  mix_seed(config.seed, kStreamPreyLearner));
      break;
  }

  std::vector<std::mt19937_64> predator_rngs;
  for (int i = 0; i < n_pred; ++i)
    predator_rngs.emplace_back(mix_seed(config.seed, kStreamPredatorRng + i));
  std::mt19937_64 prey_rng(mix_seed(config.seed, kStreamPreyRng));

  std::ofstream metrics_file;
  std::unique_ptr<TrajectoryWriter> trajectories;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    metrics_file.open(out_dir / "metrics.csv");
    if (!metrics_file) throw std::runtime_error("cannot write " + (out_dir / "metrics.csv").string());
    metrics_file << metrics_csv_header() << '\n' << std::flush;
    if (config.record_trajectories)
      trajectories = std::make_unique<TrajectoryWriter>(out_dir / "trajectories.csv");
  }

  const NanGuard nan_guard{out_dir};
  std::vector<std::pair<double, bool>> history;
  history.reserve(static_cast<std::size_t>(config.total_episodes));
  RunResult result;
  result.metrics.reserve(static_cast<std::size_t>(config.total_episodes));

  for (std::int64_t episode = 1; episode <= config.total_episodes; ++episode) {
    auto [state, obs] = reset(world, mix_seed(config.seed, kStreamEnv + episode));
    std::vector<std::optional<Transition>> pending(total);
    double predator_reward = 0.0;
    bool captured = false;

    while (!state.done) {
      std::vector<Vec2> actions(total);
      std::vector<std::vector<double>> chosen(total);
      std::vector<PotentialFieldSpec> snapshots(total);

      for (int i = 0; i < n_pred; ++i) {
        snapshots[i] = field_spec_for_agent(state, world, i, AgentRole::kPredator);
        chosen[i] = select_action(predators[i], obs[i], /*explore=*/true, predator_rngs[i]);
        nan_guard.check_action(chosen[i], "predator_" + std::to_string(i), episode);
        actions[i] = Vec2{chosen[i][0], chosen[i][1]};
      }
      snapshots[pi] = field_spec_for_agent(state, world, pi, AgentRole::kPrey);
      if (prey_learner.has_value()) {
        chosen[pi] = select_action(*prey_learner, obs[pi], /*explore=*/true, prey_rng);
        nan_guard.check_action(chosen[pi], "prey", episode);
        actions[pi] = Vec2{chosen[pi][0], chosen[pi][1]};
      } else {
        actions[pi] = prey_policy->act(state, world, obs[pi], pi, prey_rng);
        chosen[pi] = {actions[pi].x, actions[pi].y};
      }

      // Sarsa transitions wait for the follow-up action before dispatch.
      for (int i = 0; i < n_pred; ++i) {
        if (pending[i].has_value()) {
          pending[i]->next_action = chosen[i];
          learner_observe(predators[i], std::move(*pending[i]));
          pending[i].reset();
        }
      }
      if (prey_learner.has_value() && pending[pi].has_value()) {
        pending[pi]->next_action = chosen[pi];
        learner_observe(*prey_learner, std::move(*pending[pi]));
        pending[pi].reset();
      }

      auto [next_state, step_result] = step(state, world, actions);

      auto dispatch = [&](AgentLearner& learner, int agent) {
        Transition t;
        t.obs = obs[agent];
        t.action = chosen[agent];
        t.reward = step_result.rewards[agent];
        t.next_obs = step_result.observations[agent];
        t.done = step_result.done;
        t.pf_spec_snapshot = snapshots[agent];
        t.raw_state_pos = state.positions[agent];
        if (learner.mode == Algo::kSarsaAc2 && !t.done)
          pending[agent] = std::move(t);
        else
          learner_observe(learner, std::move(t));
      };
      for (int i = 0; i < n_pred; ++i) dispatch(predators[i], i);
      if (prey_learner.has_value()) dispatch(*prey_learner, pi);

      if (trajectories) {
        for (int i = 0; i < total; ++i)
          trajectories->row(episode, state.step_count, i, next_state.positions[i],
                            next_state.velocities[i], actions[i], step_result.rewards[i],
                            step_result.done);
      }

      predator_reward += step_result.rewards[0];
      captured = captured || step_result.captured;
      state = std::move(next_state);
      obs = std::move(step_result.observations);
    }

    history.emplace_back(predator_reward, captured);
    const auto [success_rate, reward_avg] = compute_windowed_metrics(history);
    MetricsRecord record;
    record.episode = episode;
    record.episode_reward_per_predator = predator_reward;
    record.success = captured;
    record.success_rate_w200 = success_rate;
    record.reward_avg_w500 = reward_avg;
    record.wall_clock_s = 0.0;
    result.metrics.push_back(record);
    if (metrics_file.is_open()) metrics_file << metrics_csv_row(record) << '\n' << std::flush;

    for (int i = 0; i < n_pred; ++i)
      nan_guard.check(predators[i], "predator_" + std::to_string(i), episode);
    if (prey_learner.has_value()) nan_guard.check(*prey_learner, "prey", episode);

    if (config.eval_every > 0 && episode % config.eval_every == 0) {
      std::vector<const MlpParams*> actors;
      for (const AgentLearner& p : predators) actors.push_back(&p.actor);
      const bool probe = run_probe_episode(
          world, actors, prey_policy.get(),
          prey_learner.has_value() ? &prey_learner->actor : nullptr,
          mix_seed(config.seed, kStreamProbeEnv + episode),
          mix_seed(config.seed, kStreamProbeRng + episode));
      if (progress != nullptr)
        *progress << "episode " << episode << " success_rate_w200=" << format_double(success_rate)
                  << " reward_avg_w500=" << format_double(reward_avg)
                  << " probe_capture=" << (probe ? 1 : 0) << std::endl;
    }
  }

  if (!out_dir.empty()) {
    for (int i = 0; i < n_pred; ++i)
      save_learner(out_dir / ("predator_" + std::to_string(i) + ".json"), predators[i]);
    if (prey_learner.has_value()) {
      save_learner(out_dir / "prey.json", *prey_learner);
    } else if (config.prey_policy == PreyPolicyKind::kPretrainedCheckpoint) {
      fs::copy_file(config.prey_checkpoint_path, out_dir / "prey.json",
                    fs::copy_options::overwrite_existing);
    }
  }

  result.measured_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (progress != nullptr)
    *progress << "run finished: " << config.total_episodes << " episodes in "
              << format_double(result.measured_seconds) << "s" << std::endl;
  return result;
}

double evaluate_policies(const WorldConfig& world, const std::vector<Policy*>& policies,
                         std::int64_t n_episodes, std::uint64_t seed,
                         std::vector<EvalEpisodeRecord>* records) {
  if (n_episodes <= 0) throw std::invalid_argument("evaluate_policies: need at least one episode");
  const int total = n_agents(world);
  if (static_cast<int>(policies.size()) != total)
    throw std::invalid_argument("evaluate_policies: one policy per agent required");

  std::int64_t successes = 0;
  for (std::int64_t e = 1; e <= n_episodes; ++e) {
    auto [state, obs] = reset(world, mix_seed(seed, kStreamEvalEnv + e));
    std::mt19937_64 rng(mix_seed(seed, kStreamEvalRng + e));
    bool captured = false;
    while (!state.done) {
      std::vector<Vec2> actions(total);
      for (int i = 0; i < total; ++i) actions[i] = policies[i]->act(state, world, obs[i], i, rng);
      auto [next_state, result] = step(state, world, actions);
      captured = captured || result.captured;
      state = std::move(next_state);
      obs = std::move(result.observations);
    }
    if (captured) ++successes;
    if (records != nullptr) records->push_back({e, captured, state.step_count});
  }
  return static_cast<double>(successes) / static_cast<double>(n_episodes);
}

double evaluate_policy(const fs::path& run_dir, const ExperimentConfig& raw_config,
                       std::int64_t n_episodes, std::uint64_t seed, bool write_csv) {
  if (n_episodes <= 0) throw std::invalid_argument("evaluate_policy: need at least one episode");
  const ExperimentConfig config = resolve_scenario(raw_config);
  const WorldConfig& world = config.world;
  const int obs_dim = 4 + 4 * world.n_predators;

  std::vector<std::unique_ptr<Policy>> owned;
  for (int i = 0; i < world.n_predators; ++i) {
    const fs::path path = run_dir / ("predator_" + std::to_string(i) + ".json");
    if (!fs::exists(path)) throw std::runtime_error("missing checkpoint: " + path.string());
    const AgentLearner loaded = load_learner(path, 0);
    if (loaded.actor.spec.input_size() != obs_dim)
      throw std::runtime_error("checkpoint observation size does not match the scenario: " +
                               path.string());
    owned.push_back(std::make_unique<MlpPolicy>(loaded.actor));
  }

  const fs::path local_prey = run_dir / "prey.json";
  if (config.prey_policy == PreyPolicyKind::kRandom) {
    owned.push_back(std::make_unique<RandomPolicy>());
  } else {
    fs::path prey_path = local_prey;
    if (!fs::exists(prey_path) &&
        config.prey_policy == PreyPolicyKind::kPretrainedCheckpoint)
      prey_path = config.prey_checkpoint_path;
    if (!fs::exists(prey_path))
      throw std::runtime_error("missing prey checkpoint: " + prey_path.string());
    const AgentLearner prey = load_learner(prey_path, 0);
    if (prey.actor.spec.input_size() != obs_dim)
      throw std::runtime_error("prey checkpoint observation size does not match the scenario");
    owned.push_back(std::make_unique<MlpPolicy>(prey.actor));
  }

  std::vector<Policy*> policies;
  for (auto& p : owned) policies.push_back(p.get());
  std::vector<EvalEpisodeRecord> records;
  const double rate = evaluate_policies(world, policies, n_episodes, seed, &records);

  if (write_csv) {
    std::ofstream out(run_dir / "eval.csv");
    if (!out) throw std::runtime_error("cannot write " + (run_dir / "eval.csv").string());
    out << "episode,success,steps\n";
    for (const EvalEpisodeRecord& r : records)
      out << r.episode << ',' << (r.success ? 1 : 0) << ',' << r.steps << '\n';
  }
  return rate;
}

std::filesystem::path pretrain_prey(const ExperimentConfig& raw_config, const fs::path& out_path,
                                    std::ostream* progress) {
  const ExperimentConfig config = resolve_scenario(raw_config);
  config.world.validate();
  config.hyper.validate();
  if (config.total_episodes <= 0)
    throw std::invalid_argument("pretrain_prey: total_episodes must be positive");

  const WorldConfig& world = config.world;
  const int total = n_agents(world);
  const int pi = prey_index(world);
  const int obs_dim = 4 + 4 * world.n_predators;

  AgentLearner prey = make_learner(Algo::kDdpg, obs_dim, 2, config.hyper,
                                   mix_seed(config.seed, kStreamPreyLearner));
  std::mt19937_64 prey_rng(mix_seed(config.seed, kStreamPreyRng));
  ScriptedFieldPolicy pursuit;
  const NanGuard nan_guard{fs::path{}};

  std::int64_t survived = 0;
  for (std::int64_t episode = 1; episode <= config.total_episodes; ++episode) {
    auto [state, obs] = reset(world, mix_seed(config.seed, kStreamEnv + episode));
    bool captured = false;
    while (!state.done) {
      std::vector<Vec2> actions(total);
      for (int i = 0; i < world.n_predators; ++i)
        actions[i] = pursuit.act(state, world, obs[i], i, prey_rng);
      const std::vector<double> prey_action =
          select_action(prey, obs[pi], /*explore=*/true, prey_rng);
      actions[pi] = Vec2{prey_action[0], prey_action[1]};
      const PotentialFieldSpec snapshot = field_spec_for_agent(state, world, pi, AgentRole::kPrey);

      auto [next_state, step_result] = step(state, world, actions);

      Transition t;
      t.obs = obs[pi];
      t.action = prey_action;
      t.reward = (step_result.done && !step_result.captured) ? 10.0 : 0.0;  // survival bonus
      t.next_obs = step_result.observations[pi];
      t.done = step_result.done;
      t.pf_spec_snapshot = snapshot;
      t.raw_state_pos = state.positions[pi];
      learner_observe(prey, std::move(t));

      captured = captured || step_result.captured;
      state = std::move(next_state);
      obs = std::move(step_result.observations);
    }
    if (!captured) ++survived;
    nan_guard.check(prey, "prey", episode);
    if (progress != nullptr && config.eval_every > 0 && episode % config.eval_every == 0)
      *progress << "pretrain episode " << episode << " survival_rate="
                << format_double(static_cast<double>(survived) / static_cast<double>(episode))
                << std::endl;
  }

  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_learner(out_path, prey);
  return out_path;
}

}  // namespace pfrl
