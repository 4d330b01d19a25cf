#pragma once

#include <span>
#include <vector>

#include "mfris/geometry_channel.hpp"
#include "mfris/mfris_model.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

/// BS-side decision: per-direction NOMA power split and one beam per direction.
struct BsConfig {
  std::vector<std::vector<double>> power_fractions;  ///< [k][j], each row sums to 1
  std::vector<CVec> beams;                           ///< [k], N; ||f||^2 in Watts

  double beam_power() const;
  void validate(const NetworkScenario& scenario) const;
};

/// Combined channels and every effective scalar g_u f_b.
struct LinkBudget {
  std::vector<CRow> combined;  ///< g_u, 1 x N
  Eigen::MatrixXcd effective;  ///< (u, b) -> g_u f_b
  Eigen::VectorXd ris_noise;   ///< sum_q sigma_s^2 ||r_{q,u}^H Theta_q^k||^2
};

LinkBudget link_budget(const NetworkScenario& scenario, const ChannelRealization& channels,
                       std::span<const MfRisConfig> surfaces, std::span<const CVec> beams);

/// Users of direction k sorted ascending by |g_kj f_k|^2 / (I_kj + sigma_u^2);
/// exact ties keep index order.
std::vector<int> sic_order(const NetworkScenario& scenario, const LinkBudget& links, int k);

/// True when every adjacent pair of `order` satisfies the SIC decoding
/// inequality.
bool sic_condition_holds(const NetworkScenario& scenario, const LinkBudget& links, int k,
                         std::span<const int> order);

/// Every power term seen by one user; sinr() = signal / (intra + inter_group + ris_noise + noise).
struct SinrTerms {
  double signal = 0.0;
  double intra = 0.0;
  double inter_group = 0.0;
  double ris_noise = 0.0;
  double noise = 0.0;

  double denominator() const { return intra + inter_group + ris_noise + noise; }
  double sinr() const { return signal / denominator(); }
};

SinrTerms sinr_terms(const NetworkScenario& scenario, const LinkBudget& links, const BsConfig& bs, int k,
                     int j, std::span<const int> order);
double sinr(const NetworkScenario& scenario, const LinkBudget& links, const BsConfig& bs, int k, int j,
            std::span<const int> order);

double rate(double gamma);

/// Below this total power the EE denominator is floored.
inline constexpr double kPowerFloor = 1e-6;

struct PenaltyWeights {
  double rho1 = 1e-3;
  double rho2 = 1e-5;
  double rho3 = 1e-5;
};

struct Penalties {
  double c1 = 0.0;  ///< rate shortfall
  double c2 = 0.0;  ///< BS power excess
  double c3 = 0.0;  ///< surface energy deficit
};

Penalties penalties(std::span<const double> rates, double rate_min, double beam_power, double p_bs_max,
                    std::span<const SurfaceBudget> budgets);

/// sum_q (consumed - harvested) + beam_power, unfloored.
double total_power(double beam_power, std::span<const SurfaceBudget> budgets);

struct EeReport {
  std::vector<double> rates;  ///< flat user index
  double sum_rate = 0.0;
  double beam_power = 0.0;
  double p_total = 0.0;  ///< after the floor
  bool power_floor_hit = false;
  double ee = 0.0;
  Penalties pen;
  double reward = 0.0;
  bool sic_consistent = true;
  std::vector<SurfaceBudget> budgets;
};

std::vector<SurfaceBudget> surface_budgets(const NetworkScenario& scenario, const ChannelRealization& channels,
                                           std::span<const MfRisConfig> surfaces, std::span<const CVec> beams);

/// Per-user NOMA rates with SIC; also reports whether every ordering
/// satisfied the decoding inequality.
std::vector<double> noma_rates(const NetworkScenario& scenario, const LinkBudget& links, const BsConfig& bs,
                               bool* sic_consistent = nullptr);

/// Assembles an EeReport from precomputed rates.
EeReport assemble_report(const NetworkScenario& scenario, std::vector<double> rates, double beam_power,
                         std::vector<SurfaceBudget> budgets, const PenaltyWeights& weights);

EeReport evaluate(const NetworkScenario& scenario, const ChannelRealization& channels, const BsConfig& bs,
                  std::span<const MfRisConfig> surfaces, const PenaltyWeights& weights);

}  // namespace mfris
