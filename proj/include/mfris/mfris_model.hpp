#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfris/scenario.hpp"
#include "mfris/types.hpp"

namespace mfris {

/// Element configuration of one surface.
///
/// `alpha[m]` is 1 for S mode (relay) and 0 for H mode (harvest) and is
/// shared by every direction. `beta` and `theta` are K x M.
struct MfRisConfig {
  std::vector<std::uint8_t> alpha;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd theta;
  Vec3 position = Vec3::Zero();

  int elements() const { return static_cast<int>(alpha.size()); }
  int directions() const { return static_cast<int>(beta.rows()); }

  /// All elements in S mode with unit amplitude and zero phase.
  static MfRisConfig neutral(int directions, int elements, const Vec3& position);
  /// Throws std::invalid_argument when a field leaves its feasible set.
  void validate(double beta_max, const Vec3& w_min, const Vec3& w_max) const;
};

/// diag(alpha_m sqrt(beta^k_m) exp(j theta^k_m)).
CDiag theta_matrix(const MfRisConfig& cfg, int k);

/// Expected RF power at element m: (1 - alpha_m)(|h_m sum_k f_k|^2 + sigma_s^2).
double rf_power_element(const CRow& h_row, std::span<const CVec> beams, std::uint8_t alpha,
                        double sigma_s2);

/// Logistic harvesting curve shifted so that zero input gives zero output.
double harvested_power(double p_rf, const EhModelParams& eh);

int pin_diode_count(int levels_alpha, int levels_beta, int levels_theta, int directions);

/// sum_k (sum_k' ||Theta^k H f_k'||^2 + sigma_s^2 ||Theta^k||_F^2).
double output_power(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams, double sigma_s2);

double consumed_power(const PowerModelParams& power, int directions, int elements, double output_power);

/// Per-surface power accounting for one configuration.
struct SurfaceBudget {
  double harvested = 0.0;
  double output = 0.0;
  double consumed = 0.0;

  /// >= 0 means the surface is self-sustaining.
  double margin() const { return harvested - consumed; }
};

SurfaceBudget surface_budget(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams,
                             const NetworkScenario& scenario);

double self_sustain_margin(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams,
                           const NetworkScenario& scenario);

}  // namespace mfris
