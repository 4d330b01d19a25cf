#include "mfris/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace mfris {

CVec mr_beam(const CRow& g, double power) {
  const double n = g.norm();
  if (n == 0.0) return CVec::Zero(g.size());
  return std::sqrt(power) * g.adjoint() / n;
}

std::vector<double> oma_rates(const NetworkScenario& s, std::span<const CRow> combined,
                              std::span<const CVec> beams) {
  const int users = static_cast<int>(combined.size());
  if (users == 0) return {};
  double power = 0.0;
  for (const auto& f : beams) power += f.squaredNorm();
  const double share = 1.0 / users;
  std::vector<double> rates(users);
  for (int u = 0; u < users; ++u) {
    const CVec f = mr_beam(combined[u], power);
    const double gain = std::norm((combined[u] * f)(0));
    rates[u] = share * std::log2(1.0 + gain / s.sigma_u2);
  }
  return rates;
}

std::vector<double> sdma_rates(const NetworkScenario& s, const LinkBudget& lb) {
  const auto users = lb.effective.rows();
  if (lb.effective.cols() != users) throw std::invalid_argument("sdma_rates: need one beam per user");
  std::vector<double> rates(users);
  for (Eigen::Index u = 0; u < users; ++u) {
    double interference = 0.0;
    for (Eigen::Index v = 0; v < users; ++v) {
      if (v != u) interference += std::norm(lb.effective(u, v));
    }
    const double gamma = std::norm(lb.effective(u, u)) / (interference + lb.ris_noise[u] + s.sigma_u2);
    rates[u] = std::log2(1.0 + gamma);
  }
  return rates;
}

}  // namespace mfris
