#include "mfris/noma_phy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mfris {

double BsConfig::beam_power() const {
  double p = 0.0;
  for (const auto& f : beams) p += f.squaredNorm();
  return p;
}

void BsConfig::validate(const NetworkScenario& s) const {
  if (static_cast<int>(power_fractions.size()) != s.directions() ||
      static_cast<int>(beams.size()) != s.directions()) {
    throw std::invalid_argument("BsConfig: one fraction row and one beam per direction required");
  }
  for (int k = 0; k < s.directions(); ++k) {
    const auto& row = power_fractions[k];
    if (static_cast<int>(row.size()) != s.users_in(k)) throw std::invalid_argument("BsConfig: fraction count");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("BsConfig: negative power fraction");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("BsConfig: fractions must sum to 1");
    if (beams[k].size() != s.antennas) throw std::invalid_argument("BsConfig: beam length");
  }
}

LinkBudget link_budget(const NetworkScenario& s, const ChannelRealization& ch,
                       std::span<const MfRisConfig> surfaces, std::span<const CVec> beams) {
  const auto users = s.user_list();
  const int n_users = static_cast<int>(users.size());
  const int q_count = static_cast<int>(surfaces.size());
  if (q_count != static_cast<int>(ch.bs_ris.size())) {
    throw std::invalid_argument("link_budget: surface count mismatch");
  }
  LinkBudget lb;
  lb.combined.reserve(n_users);
  lb.effective.resize(n_users, static_cast<Eigen::Index>(beams.size()));
  lb.ris_noise = Eigen::VectorXd::Zero(n_users);

  // Theta_q^k is reused by every user of direction k.
  std::vector<std::vector<CDiag>> thetas(q_count);
  for (int q = 0; q < q_count; ++q) {
    for (int k = 0; k < s.directions(); ++k) thetas[q].push_back(theta_matrix(surfaces[q], k));
  }

  std::vector<CRow> cascaded(q_count);
  for (int u = 0; u < n_users; ++u) {
    const int k = users[u].first;
    for (int q = 0; q < q_count; ++q) {
      const CVec& r = ch.ris_user[q][u];
      cascaded[q] = cascaded_channel(r, thetas[q][k], ch.bs_ris[q]);
      lb.ris_noise[u] += s.sigma_s2 * (r.adjoint() * thetas[q][k]).squaredNorm();
    }
    lb.combined.push_back(combined_channel(ch.direct[u], cascaded));
    for (std::size_t b = 0; b < beams.size(); ++b) {
      lb.effective(u, static_cast<Eigen::Index>(b)) = (lb.combined[u] * beams[b])(0);
    }
  }
  return lb;
}

std::vector<int> sic_order(const NetworkScenario& s, const LinkBudget& lb, int k) {
  const int j_count = s.users_in(k);
  std::vector<double> metric(j_count);
  for (int j = 0; j < j_count; ++j) {
    const int u = s.user_index(k, j);
    metric[j] = std::norm(lb.effective(u, k)) / (lb.ris_noise[u] + s.sigma_u2);
  }
  std::vector<int> order(j_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return metric[a] < metric[b]; });
  return order;
}

bool sic_condition_holds(const NetworkScenario& s, const LinkBudget& lb, int k, std::span<const int> order) {
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const int uj = s.user_index(k, order[i]);
    const int ul = s.user_index(k, order[i + 1]);
    const double gj = std::norm(lb.effective(uj, k));
    const double gl = std::norm(lb.effective(ul, k));
    const double lhs = gj / (gl + lb.ris_noise[uj] + s.sigma_u2);
    const double rhs = gl / (gj + lb.ris_noise[ul] + s.sigma_u2);
    if (lhs > rhs * (1.0 + 1e-12)) return false;
  }
  return true;
}

SinrTerms sinr_terms(const NetworkScenario& s, const LinkBudget& lb, const BsConfig& bs, int k, int j,
                     std::span<const int> order) {
  const int u = s.user_index(k, j);
  const double own = std::norm(lb.effective(u, k));
  SinrTerms t;
  t.signal = own * bs.power_fractions[k][j];
  // Users decoded after j (stronger ones) remain as interference.
  const auto pos = std::find(order.begin(), order.end(), j);
  if (pos == order.end()) throw std::invalid_argument("sinr_terms: user missing from SIC order");
  for (auto it = pos + 1; it != order.end(); ++it) t.intra += own * bs.power_fractions[k][*it];
  for (int kb = 0; kb < s.directions(); ++kb) {
    if (kb == k) continue;
    double share = 0.0;
    for (double p : bs.power_fractions[kb]) share += p;
    t.inter_group += std::norm(lb.effective(u, kb)) * share;
  }
  t.ris_noise = lb.ris_noise[u];
  t.noise = s.sigma_u2;
  return t;
}

double sinr(const NetworkScenario& s, const LinkBudget& lb, const BsConfig& bs, int k, int j,
            std::span<const int> order) {
  return sinr_terms(s, lb, bs, k, j, order).sinr();
}

double rate(double gamma) {
  if (!(gamma >= 0.0)) throw std::domain_error("rate: negative SINR");
  return std::log2(1.0 + gamma);
}

Penalties penalties(std::span<const double> rates, double rate_min, double beam_power, double p_bs_max,
                    std::span<const SurfaceBudget> budgets) {
  Penalties p;
  for (double r : rates) p.c1 += std::max(0.0, rate_min - r);
  p.c2 = std::max(0.0, beam_power - p_bs_max);
  for (const auto& b : budgets) p.c3 += std::max(0.0, b.consumed - b.harvested);
  return p;
}

double total_power(double beam_power, std::span<const SurfaceBudget> budgets) {
  double p = beam_power;
  for (const auto& b : budgets) p += b.consumed - b.harvested;
  return p;
}

std::vector<SurfaceBudget> surface_budgets(const NetworkScenario& s, const ChannelRealization& ch,
                                           std::span<const MfRisConfig> surfaces, std::span<const CVec> beams) {
  std::vector<SurfaceBudget> out;
  out.reserve(surfaces.size());
  for (std::size_t q = 0; q < surfaces.size(); ++q) out.push_back(surface_budget(surfaces[q], ch.bs_ris[q], beams, s));
  return out;
}

std::vector<double> noma_rates(const NetworkScenario& s, const LinkBudget& lb, const BsConfig& bs,
                               bool* sic_consistent) {
  std::vector<double> rates(s.total_users(), 0.0);
  bool consistent = true;
  for (int k = 0; k < s.directions(); ++k) {
    const auto order = sic_order(s, lb, k);
    consistent = consistent && sic_condition_holds(s, lb, k, order);
    for (int j = 0; j < s.users_in(k); ++j) rates[s.user_index(k, j)] = rate(sinr(s, lb, bs, k, j, order));
  }
  if (sic_consistent) *sic_consistent = consistent;
  return rates;
}

EeReport assemble_report(const NetworkScenario& s, std::vector<double> rates, double beam_power,
                         std::vector<SurfaceBudget> budgets, const PenaltyWeights& w) {
  EeReport rep;
  rep.rates = std::move(rates);
  rep.budgets = std::move(budgets);
  rep.beam_power = beam_power;
  rep.sum_rate = std::accumulate(rep.rates.begin(), rep.rates.end(), 0.0);
  const double raw_total = total_power(beam_power, rep.budgets);
  rep.power_floor_hit = raw_total < kPowerFloor;
  rep.p_total = std::max(raw_total, kPowerFloor);
  rep.ee = rep.sum_rate / rep.p_total;
  rep.pen = penalties(rep.rates, s.rate_min, beam_power, s.p_bs_max, rep.budgets);
  rep.reward = rep.ee - w.rho1 * rep.pen.c1 - w.rho2 * rep.pen.c2 - w.rho3 * rep.pen.c3;
  return rep;
}

EeReport evaluate(const NetworkScenario& s, const ChannelRealization& ch, const BsConfig& bs,
                  std::span<const MfRisConfig> surfaces, const PenaltyWeights& w) {
  const LinkBudget lb = link_budget(s, ch, surfaces, bs.beams);
  bool consistent = true;
  auto rates = noma_rates(s, lb, bs, &consistent);
  auto rep = assemble_report(s, std::move(rates), bs.beam_power(), surface_budgets(s, ch, surfaces, bs.beams), w);
  rep.sic_consistent = consistent;
  return rep;
}

}  // namespace mfris
