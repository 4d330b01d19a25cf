#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mfris/config.hpp"
#include "mfris/nn.hpp"
#include "mfris/noma_phy.hpp"
#include "mfris/trainer.hpp"

namespace mfris {

// Each kernel has a serial reference and an OpenMP version that must give
// bitwise-identical results.

/// One independent physics instance.
struct EvalInstance {
  ChannelRealization channels;
  BsConfig bs;
  std::vector<MfRisConfig> surfaces;
};

std::vector<EvalInstance> random_instances(const NetworkScenario& scenario, int count, Rng& rng);

std::vector<EeReport> evaluate_batch_serial(const NetworkScenario& scenario, const std::vector<EvalInstance>& batch,
                                            const PenaltyWeights& weights);
std::vector<EeReport> evaluate_batch_omp(const NetworkScenario& scenario, const std::vector<EvalInstance>& batch,
                                         const PenaltyWeights& weights);

/// Column-by-column forward pass over a batch of inputs.
Eigen::MatrixXd forward_columns_serial(const nn::Mlp& net, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd forward_columns_omp(const nn::Mlp& net, const Eigen::MatrixXd& inputs);

/// One training run per seed; `out_dir` receives one run directory per seed.
std::vector<RunLog> train_seeds_serial(const ExperimentConfig& config, Variant variant,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::optional<std::filesystem::path>& out_dir);
std::vector<RunLog> train_seeds_omp(const ExperimentConfig& config, Variant variant,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::optional<std::filesystem::path>& out_dir);

}  // namespace mfris
