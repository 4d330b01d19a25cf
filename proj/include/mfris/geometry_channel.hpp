#pragma once

#include <span>
#include <vector>

#include "mfris/scenario.hpp"
#include "mfris/types.hpp"

namespace mfris {

/// Large-scale gain h0 * d^-k0. Throws std::domain_error for d <= 0.
double pathloss(double distance, double h0, double k0);

/// Uniform linear array response; entry i is exp(-j 2 pi spacing_ratio i term).
CVec ula_steering(int n_elems, double spacing_ratio, double spatial_term);

/// Azimuth/elevation of the vector `to - from`.
struct Angles {
  double azimuth = 0.0;
  double elevation = 0.0;
};
Angles angles_between(const Vec3& from, const Vec3& to);

/// Rank-one LoS matrix (M x N) between the BS and a surface at `surface_pos`:
/// (vertical steering (x) horizontal steering) * (BS steering)^T.
CMat los_bs_to_ris(const NetworkScenario& scenario, const Vec3& surface_pos);
/// LoS response (N) of the direct BS -> user link.
CVec los_bs_to_user(const NetworkScenario& scenario, const Vec3& user_pos);
/// LoS response (M) of the surface -> user link.
CVec los_ris_to_user(const NetworkScenario& scenario, const Vec3& surface_pos, const Vec3& user_pos);

/// i.i.d. CN(0, 1) matrix.
CMat draw_cn(int rows, int cols, Rng& rng);

/// sqrt(gain) * (sqrt(b/(b+1)) LoS + sqrt(1/(b+1)) NLoS). An infinite Rician
/// factor yields pure LoS.
CMat rician_compose(const CMat& los, const CMat& nlos, double beta0, double pathloss_gain);
CMat rician_channel(const CMat& los, double beta0, double pathloss_gain, Rng& rng);

/// Small-scale Rayleigh draws for every link of a scenario.
struct NlosDraws {
  std::vector<CMat> bs_ris;                 ///< [q], M x N
  std::vector<CVec> bs_user;                ///< [u], N
  std::vector<std::vector<CVec>> ris_user;  ///< [q][u], M

  static NlosDraws draw(const NetworkScenario& scenario, Rng& rng);
};

/// Positions of every node for one realization.
struct Placement {
  std::vector<Vec3> users;     ///< flat user index
  std::vector<Vec3> surfaces;  ///< [q]
};

/// All complex links for one fading draw.
struct ChannelRealization {
  std::vector<CMat> bs_ris;                 ///< H_q, M x N
  std::vector<CVec> direct;                 ///< h_kj, N (flat user index)
  std::vector<std::vector<CVec>> ris_user;  ///< r_{q,kj}, M, [q][u]
  NlosDraws nlos;

  bool all_finite() const;
};

ChannelRealization build_channels(const NetworkScenario& scenario, const Placement& placement,
                                  NlosDraws nlos);

/// g_{q,kj} = r^H Theta H as a 1 x N row.
CRow cascaded_channel(const CVec& r, const CDiag& theta, const CMat& h);

/// g_kj = h^H + sum_q g_{q,kj}. The direct link is conjugate-transposed so
/// that g_kj * f_k is the received scalar.
CRow combined_channel(const CVec& direct, std::span<const CRow> cascaded);

/// True when `user_pos` sits on the same side of the surface plane
/// (normal along x) as the BS, i.e. it is reachable by pure reflection.
bool reflection_side(const Vec3& bs_pos, const Vec3& surface_pos, const Vec3& user_pos);

}  // namespace mfris
