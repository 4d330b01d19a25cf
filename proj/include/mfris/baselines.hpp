#pragma once

#include <span>
#include <vector>

#include "mfris/noma_phy.hpp"

namespace mfris {

// Simplified multiple-access baselines. Neither is a reproduction of a
// published scheme; both are labelled "simplified" wherever results are written.

/// Time-shared OMA: each of the U users gets 1/U of the time with a dedicated
/// maximum-ratio beam carrying the full power sum_k ||f_k||^2.
/// R_u = (1/U) log2(1 + P ||g_u||^2 / sigma_u^2).
std::vector<double> oma_rates(const NetworkScenario& scenario, std::span<const CRow> combined,
                              std::span<const CVec> beams);

/// Maximum-ratio beam toward g with power `power`.
CVec mr_beam(const CRow& g, double power);

/// SDMA without SIC: one beam per user (flat index), every other user's beam
/// is interference. `links.effective` must be U x U.
std::vector<double> sdma_rates(const NetworkScenario& scenario, const LinkBudget& links);

}  // namespace mfris
