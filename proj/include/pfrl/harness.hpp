#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pfrl/environment.hpp"
#include "pfrl/learner.hpp"

namespace pfrl {

enum class Scenario { kOneVOne, kThreeVOnePretrained, kThreeVOneSimultaneous };
enum class PreyPolicyKind { kPretrainedCheckpoint, kTrainedSimultaneously, kRandom };

std::string to_string(Scenario s);
std::string to_string(PreyPolicyKind k);
Scenario scenario_from_string(const std::string& s);
PreyPolicyKind prey_policy_from_string(const std::string& s);

struct ExperimentConfig {
  Scenario scenario = Scenario::kOneVOne;
  Algo predator_algo = Algo::kPgddpg;
  PreyPolicyKind prey_policy = PreyPolicyKind::kRandom;
  std::string prey_checkpoint_path;  // pretrained_checkpoint mode
  Algo prey_algo = Algo::kDdpg;      // trained_simultaneously mode
  std::int64_t total_episodes = 1000;
  int eval_every = 100;  // greedy probe cadence; 0 disables
  bool record_trajectories = false;
  std::uint64_t seed = 0;
  WorldConfig world;
  HyperParams hyper;

  void validate() const;
};

// Applies the scenario's agent-count (and, for the simultaneous scenario,
// prey-policy) requirements to a copy of the config.
ExperimentConfig resolve_scenario(const ExperimentConfig& config);

struct MetricsRecord {
  std::int64_t episode = 0;  // 1-based
  double episode_reward_per_predator = 0.0;
  bool success = false;
  double success_rate_w200 = 0.0;
  double reward_avg_w500 = 0.0;
  double wall_clock_s = 0.0;  // reserved column, always 0 (see README)
};

// Success rate over the latest min(200, n) episodes and mean predator reward
// over the latest min(500, n); throws std::invalid_argument on empty history.
std::pair<double, double> compute_windowed_metrics(
    const std::vector<std::pair<double, bool>>& history);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

// Action source for evaluation episodes and scripted opponents.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Vec2 act(const WorldState& state, const WorldConfig& config,
                   const std::vector<double>& obs, int agent_index, std::mt19937_64& rng) = 0;
};

// Greedy network policy, optionally with Gaussian exploration noise.
class MlpPolicy : public Policy {
 public:
  explicit MlpPolicy(MlpParams actor, double noise_sigma = 0.0);
  Vec2 act(const WorldState&, const WorldConfig&, const std::vector<double>& obs, int,
           std::mt19937_64& rng) override;

 private:
  MlpParams actor_;
  double noise_sigma_;
};

// Unit action along the agent's potential-field force (the beta = 0 greedy
// field follower).
class ScriptedFieldPolicy : public Policy {
 public:
  Vec2 act(const WorldState& state, const WorldConfig& config, const std::vector<double>&,
           int agent_index, std::mt19937_64&) override;
};

class RandomPolicy : public Policy {
 public:
  Vec2 act(const WorldState&, const WorldConfig&, const std::vector<double>&, int,
           std::mt19937_64& rng) override;
};

class StationaryPolicy : public Policy {
 public:
  Vec2 act(const WorldState&, const WorldConfig&, const std::vector<double>&, int,
           std::mt19937_64&) override {
    return Vec2{};
  }
};

struct RunResult {
  std::vector<MetricsRecord> metrics;
  double measured_seconds = 0.0;  // not part of the CSV
};

// Full training run: per-episode loop, independent per-agent learners, CSV
// metrics stream and final checkpoints under out_dir (pass an empty path to
// skip file output). Deterministic per config.seed.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         std::ostream* progress = nullptr);

struct EvalEpisodeRecord {
  std::int64_t episode = 0;
  bool success = false;
  int steps = 0;
};

// Capture fraction over n_episodes with exploration disabled. `policies`
// holds one action source per agent, prey last.
double evaluate_policies(const WorldConfig& world, const std::vector<Policy*>& policies,
                         std::int64_t n_episodes, std::uint64_t seed,
                         std::vector<EvalEpisodeRecord>* records = nullptr);

// Loads the run directory's checkpoints (and prey per the config) and
// evaluates; writes eval.csv into the run directory when write_csv is set.
double evaluate_policy(const std::filesystem::path& run_dir, const ExperimentConfig& config,
                       std::int64_t n_episodes, std::uint64_t seed, bool write_csv = true);

// Trains a DDPG prey against scripted field-following predators; the prey is
// rewarded +10 for surviving a full episode. Writes a learner checkpoint to
// out_path and returns it.
std::filesystem::path pretrain_prey(const ExperimentConfig& config,
                                    const std::filesystem::path& out_path,
                                    std::ostream* progress = nullptr);

}  // namespace pfrl
