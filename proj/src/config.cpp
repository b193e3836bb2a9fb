#include "pfrl/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string_view>

#include "pfrl/checkpoint.hpp"

namespace pfrl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& section,
                         std::initializer_list<std::string_view> allowed) {
  if (!j.is_object())
    throw std::invalid_argument("config section '" + section + "' must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("unknown key in config section '" + section +
                                  "': " + item.key());
  }
}

std::vector<Vec2> points_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw std::invalid_argument(what + " must be a list of [x, y] pairs");
  std::vector<Vec2> points;
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 2)
      throw std::invalid_argument(what + " must be a list of [x, y] pairs");
    points.push_back(Vec2{p[0].get<double>(), p[1].get<double>()});
  }
  return points;
}

json points_to_json(const std::vector<Vec2>& points) {
  json arr = json::array();
  for (const Vec2& p : points) arr.push_back({p.x, p.y});
  return arr;
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void parse_world(const json& j, WorldConfig& world) {
  reject_unknown_keys(j, "world",
                      {"n_predators", "predator_bound", "prey_bound", "predator_radius",
                       "prey_radius", "max_speed", "dt", "damping", "accel_scale",
                       "episode_max_steps", "capture_distance", "seed"});
  read(j, "n_predators", world.n_predators);
  read(j, "predator_bound", world.predator_bound);
  read(j, "prey_bound", world.prey_bound);
  read(j, "predator_radius", world.predator_radius);
  read(j, "prey_radius", world.prey_radius);
  read(j, "max_speed", world.max_speed);
  read(j, "dt", world.dt);
  read(j, "damping", world.damping);
  read(j, "accel_scale", world.accel_scale);
  read(j, "episode_max_steps", world.episode_max_steps);
  read(j, "capture_distance", world.capture_distance);
  read(j, "seed", world.seed);
}

void parse_field(const json& j, FieldSettings& field) {
  reject_unknown_keys(j, "field",
                      {"xi", "eta", "d0", "prey_d0", "prey_center_xi", "epsilon_dist",
                       "goal_points", "obstacle_points"});
  read(j, "xi", field.xi);
  read(j, "eta", field.eta);
  read(j, "d0", field.d0);
  read(j, "prey_d0", field.prey_d0);
  read(j, "prey_center_xi", field.prey_center_xi);
  read(j, "epsilon_dist", field.epsilon_dist);
  if (j.contains("goal_points"))
    field.goal_points = points_from_json(j.at("goal_points"), "field.goal_points");
  if (j.contains("obstacle_points"))
    field.obstacle_points = points_from_json(j.at("obstacle_points"), "field.obstacle_points");
}

void parse_hyper(const json& j, HyperParams& hyper) {
  reject_unknown_keys(j, "hyper",
                      {"beta", "gamma1", "gamma2", "actor_lr", "critic_lr", "tau", "noise_sigma",
                       "batch_size", "buffer_capacity", "warmup_steps", "update_every",
                       "optimizer", "hidden_sizes"});
  read(j, "beta", hyper.beta);
  read(j, "gamma1", hyper.gamma1);
  read(j, "gamma2", hyper.gamma2);
  read(j, "actor_lr", hyper.actor_lr);
  read(j, "critic_lr", hyper.critic_lr);
  read(j, "tau", hyper.tau);
  read(j, "noise_sigma", hyper.noise_sigma);
  read(j, "batch_size", hyper.batch_size);
  read(j, "buffer_capacity", hyper.buffer_capacity);
  read(j, "warmup_steps", hyper.warmup_steps);
  read(j, "update_every", hyper.update_every);
  if (j.contains("optimizer"))
    hyper.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  read(j, "hidden_sizes", hyper.hidden_sizes);
}

void parse_experiment(const json& j, ExperimentConfig& config) {
  reject_unknown_keys(j, "experiment",
                      {"scenario", "predator_algo", "prey_policy", "prey_checkpoint_path",
                       "prey_algo", "total_episodes", "eval_every", "record_trajectories",
                       "seed"});
  if (j.contains("scenario"))
    config.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  if (j.contains("predator_algo"))
    config.predator_algo = algo_from_string(j.at("predator_algo").get<std::string>());
  if (j.contains("prey_policy"))
    config.prey_policy = prey_policy_from_string(j.at("prey_policy").get<std::string>());
  read(j, "prey_checkpoint_path", config.prey_checkpoint_path);
  if (j.contains("prey_algo"))
    config.prey_algo = algo_from_string(j.at("prey_algo").get<std::string>());
  read(j, "total_episodes", config.total_episodes);
  read(j, "eval_every", config.eval_every);
  read(j, "record_trajectories", config.record_trajectories);
  read(j, "seed", config.seed);
}

}  // namespace

ExperimentConfig run_config_from_json(const json& j) {
  reject_unknown_keys(j, "<top level>", {"world", "field", "hyper", "experiment"});
  ExperimentConfig config;
  if (j.contains("world")) parse_world(j.at("world"), config.world);
  if (j.contains("field")) parse_field(j.at("field"), config.world.field);
  if (j.contains("hyper")) parse_hyper(j.at("hyper"), config.hyper);
  if (j.contains("experiment")) parse_experiment(j.at("experiment"), config);
  return config;
}

ExperimentConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig config = run_config_from_json(j);
  if (!config.prey_checkpoint_path.empty()) {
    const std::filesystem::path prey(config.prey_checkpoint_path);
    if (prey.is_relative())
      config.prey_checkpoint_path = (path.parent_path() / prey).string();
  }
  return config;
}

nlohmann::json run_config_to_json(const ExperimentConfig& config) {
  json world;
  world["n_predators"] = config.world.n_predators;
  world["predator_bound"] = config.world.predator_bound;
  world["prey_bound"] = config.world.prey_bound;
  world["predator_radius"] = config.world.predator_radius;
  world["prey_radius"] = config.world.prey_radius;
  world["max_speed"] = config.world.max_speed;
  world["dt"] = config.world.dt;
  world["damping"] = config.world.damping;
  world["accel_scale"] = config.world.accel_scale;
  world["episode_max_steps"] = config.world.episode_max_steps;
  world["capture_distance"] = config.world.capture_distance;
  world["seed"] = config.world.seed;

  json field;
  field["xi"] = config.world.field.xi;
  field["eta"] = config.world.field.eta;
  field["d0"] = config.world.field.d0;
  field["prey_d0"] = config.world.field.prey_d0;
  field["prey_center_xi"] = config.world.field.prey_center_xi;
  field["epsilon_dist"] = config.world.field.epsilon_dist;
  field["goal_points"] = points_to_json(config.world.field.goal_points);
  field["obstacle_points"] = points_to_json(config.world.field.obstacle_points);

  json experiment;
  experiment["scenario"] = to_string(config.scenario);
  experiment["predator_algo"] = to_string(config.predator_algo);
  experiment["prey_policy"] = to_string(config.prey_policy);
  experiment["prey_checkpoint_path"] = config.prey_checkpoint_path;
  experiment["prey_algo"] = to_string(config.prey_algo);
  experiment["total_episodes"] = config.total_episodes;
  experiment["eval_every"] = config.eval_every;
  experiment["record_trajectories"] = config.record_trajectories;
  experiment["seed"] = config.seed;

  json j;
  j["world"] = world;
  j["field"] = field;
  j["hyper"] = hyper_to_json(config.hyper);
  j["experiment"] = experiment;
  return j;
}

void save_run_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << run_config_to_json(config).dump(2) << '\n';
}

}  // namespace pfrl
