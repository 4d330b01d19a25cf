#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfris/config.hpp"
#include "mfris/controllers.hpp"
#include "mfris/env.hpp"
#include "mfris/variant.hpp"

namespace mfris {

struct StepRecord {
  int episode = 0;
  int step = 0;
  std::int64_t global_step = 0;
  double reward = 0.0;
  double ee = 0.0;
  double sum_rate = 0.0;
  double p_total = 0.0;
  double beam_power = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double dqn_loss = 0.0;
  double clip_objective = 0.0;
  double value_loss = 0.0;
  double epsilon = 0.0;
};

/// Append-only per-step training log.
struct RunLog {
  std::vector<StepRecord> steps;

  static const std::vector<std::string>& columns();
  void write_csv(const std::filesystem::path& path) const;
  static RunLog read_csv(const std::filesystem::path& path);
  /// Bit-pattern comparison of every field (NaN == NaN).
  bool identical(const RunLog& other) const;
  /// Mean of `field` over the first or last `fraction` of the steps.
  double head_mean(double fraction, double StepRecord::*field) const;
  double tail_mean(double fraction, double StepRecord::*field) const;
};

/// Episode seeds derived from the run seed; training and evaluation use
/// disjoint streams.
std::uint64_t episode_seed(std::uint64_t run_seed, int episode, bool evaluation = false);

struct Run {
  ExperimentConfig config;
  Variant variant = Variant::Full;
  std::uint64_t seed = 1;
  std::unique_ptr<MultiAgentEnv> env;
  std::unique_ptr<Controller> controller;
};

/// Environment and controller for one (config, variant, seed) triple.
Run make_run(const ExperimentConfig& config, Variant variant, std::uint64_t seed);

std::string run_id(Variant variant, std::uint64_t seed);

/// Trains for config.train.episodes episodes. With `run_dir` set, writes the
/// log, config echo, metadata and checkpoints below it.
RunLog train(Run& run, const std::optional<std::filesystem::path>& run_dir = std::nullopt);

struct EvalResult {
  std::vector<double> episode_ee;
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

/// Deterministic-policy evaluation: greedy Q, Gaussian means, no learning.
EvalResult evaluate(Run& run, int episodes);

void save_checkpoint(const Run& run, const std::filesystem::path& run_dir, std::int64_t step);
/// Rebuilds a run from `<run_dir>/config.yaml` and `run.json` and loads the
/// newest checkpoint of every agent.
Run load_run(const std::filesystem::path& run_dir);

}  // namespace mfris
