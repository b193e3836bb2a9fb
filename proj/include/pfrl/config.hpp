#pragma once

#include <filesystem>

#include <json.hpp>

#include "pfrl/harness.hpp"

namespace pfrl {

// Run configuration document with sections world, field, hyper, experiment.
// Every key is optional and falls back to the documented default; unknown
// keys are rejected with an error naming the key. A relative
// prey_checkpoint_path is resolved against the config file's directory.
ExperimentConfig run_config_from_json(const nlohmann::json& j);
ExperimentConfig load_run_config(const std::filesystem::path& path);

// Full effective configuration with every field explicit; feeding it back
// through load_run_config reproduces the run.
nlohmann::json run_config_to_json(const ExperimentConfig& config);
void save_run_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace pfrl
