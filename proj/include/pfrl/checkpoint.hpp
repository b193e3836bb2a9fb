#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pfrl/learner.hpp"
#include "pfrl/mlp.hpp"

namespace pfrl {

// Versioned network document: spec plus flat row-major parameter arrays.
// Round-trips are loss-free at 64-bit precision.
nlohmann::json mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const nlohmann::json& j);
void save_mlp(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_mlp(const std::filesystem::path& path);

nlohmann::json hyper_to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const nlohmann::json& j);

// One document per agent: mode, hyperparameters, critic list and all four
// networks. The replay buffer is not persisted.
nlohmann::json learner_to_json(const AgentLearner& learner);
AgentLearner learner_from_json(const nlohmann::json& j, std::uint64_t buffer_seed);
void save_learner(const std::filesystem::path& path, const AgentLearner& learner);
AgentLearner load_learner(const std::filesystem::path& path, std::uint64_t buffer_seed);

}  // namespace pfrl
