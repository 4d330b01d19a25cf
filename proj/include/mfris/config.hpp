#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfris/controllers.hpp"
#include "mfris/env.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

struct TrainConfig {
  int episodes = 300;
  int steps_per_episode = 1000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool fixed_users = false;
  bool freeze_fading = false;
  int eval_episodes = 5;
  int checkpoint_every = 0;  ///< episodes; 0 keeps only the final checkpoint
  PenaltyWeights weights;
  AgentConfigs agents;

  void validate() const;
};

struct ExperimentConfig {
  NetworkScenario scenario = NetworkScenario::full_defaults();
  TrainConfig train;

  /// Environment options implied by the train section (horizon, fading,
  /// penalty weights, user placement).
  EnvOptions env_options() const;
};

/// Parses a YAML config. Keys are optional and default to the full-size
/// profile; unknown keys are rejected. Quantities use the units in their
/// key names (dB, dBm, mW, m).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serializes every resolved value in the same schema parse_config reads.
std::string echo_config(const ExperimentConfig& cfg);

}  // namespace mfris
