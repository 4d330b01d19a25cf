#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mfris/config.hpp"
#include "mfris/trainer.hpp"
#include "mfris/variant.hpp"

namespace mfris {

/// Fraction of steps averaged at each end of a log.
inline constexpr double kSummaryFraction = 0.1;

struct SeedSummary {
  std::uint64_t seed = 0;
  double first_ee = 0.0;  ///< mean EE over the first 10% of steps
  double final_ee = 0.0;  ///< mean EE over the final 10% of steps
  double final_reward = 0.0;
};

struct ExperimentSummary {
  Variant variant = Variant::Full;
  std::vector<SeedSummary> seeds;
  double final_ee_mean = 0.0;
  double final_ee_std = 0.0;  ///< population std across seeds
};

SeedSummary summarize(std::uint64_t seed, const RunLog& log);
ExperimentSummary aggregate(Variant variant, std::vector<SeedSummary> seeds);

/// Trains one run per seed below `out_dir/<variant>_s<seed>/` and writes
/// `out_dir/summary_<variant>.csv`. With `parallel` set, seeds run
/// concurrently; results are identical either way.
ExperimentSummary run_experiment(const ExperimentConfig& config, Variant variant,
                                 const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                 bool parallel = false);

}  // namespace mfris
