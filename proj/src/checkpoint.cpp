#include "pfrl/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace pfrl {

namespace {

constexpr int kMlpFormatVersion = 1;
constexpr int kLearnerFormatVersion = 1;

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

nlohmann::json mlp_to_json(const MlpParams& params) {
  params.validate();
  if (!params_finite(params))
    throw std::invalid_argument("mlp_to_json: parameters must be finite");
  nlohmann::json j;
  j["version"] = kMlpFormatVersion;
  j["layer_sizes"] = params.spec.layer_sizes;
  j["hidden_activation"] = to_string(params.spec.hidden_activation);
  j["output_activation"] = to_string(params.spec.output_activation);
  j["weights"] = params.weights;
  j["biases"] = params.biases;
  return j;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kMlpFormatVersion)
    throw std::runtime_error("unsupported network checkpoint version");
  MlpParams params;
  params.spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  params.spec.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
  params.spec.output_activation =
      output_activation_from_string(j.at("output_activation").get<std::string>());
  params.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  params.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  params.validate();
  return params;
}

void save_mlp(const std::filesystem::path& path, const MlpParams& params) {
  write_json_file(path, mlp_to_json(params));
}

MlpParams load_mlp(const std::filesystem::path& path) {
  return mlp_from_json(load_json_file(path));
}

nlohmann::json hyper_to_json(const HyperParams& hyper) {
  nlohmann::json j;
  j["beta"] = hyper.beta;
  j["gamma1"] = hyper.gamma1;
  j["gamma2"] = hyper.gamma2;
  j["actor_lr"] = hyper.actor_lr;
  j["critic_lr"] = hyper.critic_lr;
  j["tau"] = hyper.tau;
  j["noise_sigma"] = hyper.noise_sigma;
  j["batch_size"] = hyper.batch_size;
  j["buffer_capacity"] = hyper.buffer_capacity;
  j["warmup_steps"] = hyper.warmup_steps;
  j["update_every"] = hyper.update_every;
  j["optimizer"] = to_string(hyper.optimizer);
  j["hidden_sizes"] = hyper.hidden_sizes;
  return j;
}

HyperParams hyper_from_json(const nlohmann::json& j) {
  HyperParams h;
  h.beta = j.at("beta").get<double>();
  h.gamma1 = j.at("gamma1").get<double>();
  h.gamma2 = j.at("gamma2").get<double>();
  h.actor_lr = j.at("actor_lr").get<double>();
  h.critic_lr = j.at("critic_lr").get<double>();
  h.tau = j.at("tau").get<double>();
  h.noise_sigma = j.at("noise_sigma").get<double>();
  h.batch_size = j.at("batch_size").get<int>();
  h.buffer_capacity = j.at("buffer_capacity").get<int>();
  h.warmup_steps = j.at("warmup_steps").get<int>();
  h.update_every = j.at("update_every").get<int>();
  h.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  h.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  h.validate();
  return h;
}

nlohmann::json learner_to_json(const AgentLearner& learner) {
  nlohmann::json j;
  j["version"] = kLearnerFormatVersion;
  j["mode"] = to_string(learner.mode);
  j["obs_dim"] = learner.obs_dim;
  j["act_dim"] = learner.act_dim;
  j["hyper"] = hyper_to_json(learner.hyper);
  nlohmann::json critics = nlohmann::json::array();
  for (const CriticHandle& c : learner.critics) {
    critics.push_back({{"kind", to_string(c.kind)},
                       {"weight", c.weight},
                       {"discount", c.discount}});
  }
  j["critics"] = critics;
  j["actor"] = mlp_to_json(learner.actor);
  j["actor_target"] = mlp_to_json(learner.actor_target);
  j["critic"] = mlp_to_json(learner.critic);
  j["critic_target"] = mlp_to_json(learner.critic_target);
  return j;
}

AgentLearner learner_from_json(const nlohmann::json& j, std::uint64_t buffer_seed) {
  if (j.at("version").get<int>() != kLearnerFormatVersion)
    throw std::runtime_error("unsupported learner checkpoint version");
  const Algo mode = algo_from_string(j.at("mode").get<std::string>());
  const HyperParams hyper = hyper_from_json(j.at("hyper"));
  const int obs_dim = j.at("obs_dim").get<int>();
  const int act_dim = j.at("act_dim").get<int>();

  AgentLearner learner = make_learner(mode, obs_dim, act_dim, hyper, buffer_seed);
  learner.actor = mlp_from_json(j.at("actor"));
  learner.actor_target = mlp_from_json(j.at("actor_target"));
  learner.critic = mlp_from_json(j.at("critic"));
  learner.critic_target = mlp_from_json(j.at("critic_target"));
  learner.critics.clear();
  for (const nlohmann::json& c : j.at("critics")) {
    learner.critics.push_back({critic_kind_from_string(c.at("kind").get<std::string>()),
                               c.at("weight").get<double>(), c.at("discount").get<double>()});
  }
  return learner;
}

void save_learner(const std::filesystem::path& path, const AgentLearner& learner) {
  write_json_file(path, learner_to_json(learner));
}

AgentLearner load_learner(const std::filesystem::path& path, std::uint64_t buffer_seed) {
  return learner_from_json(load_json_file(path), buffer_seed);
}

}  // namespace pfrl
