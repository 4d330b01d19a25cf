#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace mfris {

/// Valid-mode moving average: output i is the mean of x[i .. i + w - 1].
/// A window longer than the series yields one point, the overall mean.
std::vector<double> moving_average(std::span<const double> x, int window);

/// Reads every `<in>/<run>/log.csv` and writes per-run and per-variant
/// (seed-averaged) moving-average reward and EE series to `<in>/curves/`.
/// Returns the files written; throws if no run logs are found.
std::vector<std::filesystem::path> emit_curves(const std::filesystem::path& in_dir, int window);

}  // namespace mfris
