#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pfrl/config.hpp"
#include "pfrl/format.hpp"
#include "pfrl/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::int64_t> seed;
  std::optional<std::string> scenario;
  std::optional<std::string> algo;
  std::optional<double> beta;
  std::optional<std::int64_t> episodes;
};

void add_override_options(CLI::App* cmd, Overrides& o, bool with_episodes = true) {
  cmd->add_option("--seed", o.seed, "seed override");
  cmd->add_option("--scenario", o.scenario,
                  "scenario override: one_v_one, three_v_one_pretrained, "
                  "three_v_one_simultaneous");
  cmd->add_option("--algo", o.algo,
                  "predator algorithm override: ddpg, pgddpg, sarsa_ac2, stochastic_ac2");
  cmd->add_option("--beta", o.beta, "reward-critic blend weight override");
  if (with_episodes) cmd->add_option("--episodes", o.episodes, "episode count override");
}

pfrl::ExperimentConfig load_config(const std::string& config_path, const Overrides& o) {
  pfrl::ExperimentConfig config;
  if (!config_path.empty()) config = pfrl::load_run_config(config_path);
  if (o.seed) config.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.scenario) config.scenario = pfrl::scenario_from_string(*o.scenario);
  if (o.algo) config.predator_algo = pfrl::algo_from_string(*o.algo);
  if (o.beta) config.hyper.beta = *o.beta;
  if (o.episodes) config.total_episodes = *o.episodes;
  return config;
}

int run_train(const std::string& config_path, const std::string& out_dir, const Overrides& o) {
  pfrl::ExperimentConfig config = pfrl::resolve_scenario(load_config(config_path, o));
  config.validate();
  fs::create_directories(out_dir);
  pfrl::save_run_config(fs::path(out_dir) / "config-resolved.json", config);
  pfrl::run_experiment(config, out_dir, &std::cout);
  return 0;
}

int run_eval(const std::string& config_path, const std::string& out_dir, std::int64_t episodes,
             const Overrides& o) {
  std::string effective_config = config_path;
  if (effective_config.empty()) {
    const fs::path resolved = fs::path(out_dir) / "config-resolved.json";
    if (!fs::exists(resolved))
      throw std::runtime_error("no --config given and " + resolved.string() + " not found");
    effective_config = resolved.string();
  }
  pfrl::ExperimentConfig config = pfrl::resolve_scenario(load_config(effective_config, o));
  const std::uint64_t seed = o.seed ? static_cast<std::uint64_t>(*o.seed) : config.seed;
  const double rate = pfrl::evaluate_policy(out_dir, config, episodes, seed);
  std::cout << pfrl::format_double(rate) << "\n";
  return 0;
}

int run_pretrain(const std::string& config_path, const std::string& out_dir, const Overrides& o) {
  pfrl::ExperimentConfig config = pfrl::resolve_scenario(load_config(config_path, o));
  config.world.validate();
  config.hyper.validate();
  fs::create_directories(out_dir);
  pfrl::save_run_config(fs::path(out_dir) / "config-resolved.json", config);
  const fs::path checkpoint =
      pfrl::pretrain_prey(config, fs::path(out_dir) / "prey.json", &std::cout);
  std::cout << "prey checkpoint written to " << checkpoint.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predator-prey workbench: potential-field guided actor-critic training"};
  app.require_subcommand(1);

  std::string train_config, train_out = "run";
  Overrides train_overrides;
  CLI::App* train = app.add_subcommand("train", "train predators and stream metrics");
  train->add_option("--config", train_config, "run configuration JSON");
  train->add_option("--out", train_out, "output directory");
  add_override_options(train, train_overrides);

  std::string eval_config, eval_out;
  std::int64_t eval_episodes = 200;
  Overrides eval_overrides;
  CLI::App* eval = app.add_subcommand("eval", "evaluate checkpoints; prints the success rate");
  eval->add_option("--config", eval_config, "run configuration JSON (default: config-resolved.json in --out)");
  eval->add_option("--out", eval_out, "run directory holding the checkpoints")->required();
  eval->add_option("--episodes", eval_episodes, "evaluation episode count");
  add_override_options(eval, eval_overrides, /*with_episodes=*/false);

  std::string pre_config, pre_out = "prey";
  Overrides pre_overrides;
  CLI::App* pretrain =
      app.add_subcommand("pretrain-prey", "train a DDPG prey against scripted pursuers");
  pretrain->add_option("--config", pre_config, "run configuration JSON");
  pretrain->add_option("--out", pre_out, "output directory");
  add_override_options(pretrain, pre_overrides);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(train_config, train_out, train_overrides);
    if (eval->parsed()) return run_eval(eval_config, eval_out, eval_episodes, eval_overrides);
    if (pretrain->parsed()) return run_pretrain(pre_config, pre_out, pre_overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
