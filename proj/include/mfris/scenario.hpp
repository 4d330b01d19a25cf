#pragma once

#include <utility>
#include <vector>

#include "mfris/types.hpp"

namespace mfris {

/// Nonlinear (logistic) RF-to-DC harvesting curve. Units are Watts.
struct EhModelParams {
  double max_harvest = 24e-3;  ///< Z
  double steepness = 150.0;    ///< varpi_1, 1/W
  double midpoint = 0.014;     ///< varpi_2, W

  /// Offset that pins the curve to zero output at zero input.
  double omega() const { return 1.0 / (1.0 + std::exp(steepness * midpoint)); }
  void validate() const;
};

/// Static power draw of a surface.
struct PowerModelParams {
  double p_pin = 0.33e-3;  ///< per PIN diode, W
  double p_conv = 2.1e-3;  ///< RF-to-DC conversion, W
  double xi = 1.1;         ///< inverse amplifier efficiency
  int levels_alpha = 2;
  int levels_beta = 10;
  int levels_theta = 8;

  void validate() const;
};

/// Static geometry, device counts and physical constants of one network.
///
/// Users are grouped by direction; `user_centers[k][j]` is the disk center
/// for user j of direction k. Users are addressed either by (k, j) or by a
/// flat index running direction-major.
struct NetworkScenario {
  Vec3 bs_position{0.0, 0.0, 5.0};
  std::vector<std::vector<Vec3>> user_centers;
  double user_drop_radius = 2.0;
  int antennas = 6;
  int surfaces = 2;
  int elements_h = 8;
  int elements_v = 4;
  double h0 = 1e-2;
  double k0 = 2.2;
  double beta0 = db_to_linear(3.0);
  double element_spacing_ratio = 0.5;
  double antenna_spacing_ratio = 0.5;
  double sigma_s2 = dbm_to_watts(-70.0);
  double sigma_u2 = dbm_to_watts(-70.0);
  Vec3 deploy_min{5.0, 10.0, 10.0};
  Vec3 deploy_max{5.0, 45.0, 10.0};
  double p_bs_max = dbm_to_watts(40.0);
  double beta_max = 10.0;
  double rate_min = 0.2;
  EhModelParams eh;
  PowerModelParams power;

  int elements() const { return elements_h * elements_v; }
  int directions() const { return static_cast<int>(user_centers.size()); }
  int users_in(int k) const { return static_cast<int>(user_centers.at(k).size()); }
  int total_users() const;
  int max_users_per_direction() const;
  /// Flat index of user j in direction k.
  int user_index(int k, int j) const;
  /// (k, j) for every flat user index.
  std::vector<std::pair<int, int>> user_list() const;

  Vec3 deploy_mid() const { return 0.5 * (deploy_min + deploy_max); }

  void validate() const;

  /// Full-size simulation setup (M = 32, N = 6, Q = 2, K = 2, J = 2).
  static NetworkScenario full_defaults();
  /// Desk-scale profile (M = 8, N = 4, Q = 2).
  static NetworkScenario desk_defaults();
};

}  // namespace mfris
