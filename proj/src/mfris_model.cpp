#include "mfris/mfris_model.hpp"

#include <cmath>
#include <stdexcept>

namespace mfris {

MfRisConfig MfRisConfig::neutral(int directions, int elements, const Vec3& position) {
  MfRisConfig cfg;
  cfg.alpha.assign(elements, 1);
  cfg.beta = Eigen::MatrixXd::Ones(directions, elements);
  cfg.theta = Eigen::MatrixXd::Zero(directions, elements);
  cfg.position = position;
  return cfg;
}

void MfRisConfig::validate(double beta_max, const Vec3& w_min, const Vec3& w_max) const {
  const auto m = static_cast<Eigen::Index>(alpha.size());
  if (beta.cols() != m || theta.cols() != m || beta.rows() != theta.rows()) {
    throw std::invalid_argument("MfRisConfig: inconsistent dimensions");
  }
  for (auto a : alpha) {
    if (a > 1) throw std::invalid_argument("MfRisConfig: alpha must be 0 or 1");
  }
  if ((beta.array() < 0.0).any() || (beta.array() > beta_max).any()) {
    throw std::invalid_argument("MfRisConfig: beta outside [0, beta_max]");
  }
  if ((theta.array() < 0.0).any() || (theta.array() >= kTwoPi).any()) {
    throw std::invalid_argument("MfRisConfig: theta outside [0, 2pi)");
  }
  if ((position.array() < w_min.array()).any() || (position.array() > w_max.array()).any()) {
    throw std::invalid_argument("MfRisConfig: position outside deployable box");
  }
}

CDiag theta_matrix(const MfRisConfig& cfg, int k) {
  if (k < 0 || k >= cfg.directions()) throw std::out_of_range("theta_matrix: bad direction");
  const int m = cfg.elements();
  CDiag d(m);
  for (int i = 0; i < m; ++i) {
    d.diagonal()[i] = cfg.alpha[i] ? std::polar(std::sqrt(cfg.beta(k, i)), cfg.theta(k, i)) : cplx(0.0, 0.0);
  }
  return d;
}

double rf_power_element(const CRow& h_row, std::span<const CVec> beams, std::uint8_t alpha,
                        double sigma_s2) {
  if (alpha) return 0.0;
  cplx s(0.0, 0.0);
  for (const auto& f : beams) {
    if (f.size() != h_row.size()) throw std::invalid_argument("rf_power_element: dimension mismatch");
    s += (h_row * f)(0);
  }
  return std::norm(s) + sigma_s2;
}

double harvested_power(double p_rf, const EhModelParams& eh) {
  if (!(p_rf >= 0.0)) throw std::domain_error("harvested_power: negative RF power");
  // Same expression for the logistic and the offset so that p_rf = 0 cancels exactly.
  const double logistic = 1.0 / (1.0 + std::exp(-eh.steepness * (p_rf - eh.midpoint)));
  const double omega = eh.omega();
  return (eh.max_harvest * logistic - eh.max_harvest * omega) / (1.0 - omega);
}

int pin_diode_count(int levels_alpha, int levels_beta, int levels_theta, int directions) {
  if (levels_alpha < 2 || levels_beta < 2 || levels_theta < 2) {
    throw std::invalid_argument("pin_diode_count: levels must be >= 2");
  }
  const double bits = std::log2(levels_alpha) + directions * std::log2(levels_beta) +
                      directions * std::log2(levels_theta);
  // Guard against log2 rounding pushing an integer just above itself.
  return static_cast<int>(std::ceil(bits - 1e-9));
}

double output_power(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams, double sigma_s2) {
  double total = 0.0;
  for (int k = 0; k < cfg.directions(); ++k) {
    const CDiag th = theta_matrix(cfg, k);
    for (const auto& f : beams) total += (th * (h * f)).squaredNorm();
    total += sigma_s2 * th.diagonal().squaredNorm();
  }
  return total;
}

double consumed_power(const PowerModelParams& power, int directions, int elements, double output) {
  if (!(output >= 0.0)) throw std::domain_error("consumed_power: negative output power");
  const int pins = pin_diode_count(power.levels_alpha, power.levels_beta, power.levels_theta, directions);
  return pins * elements * power.p_pin + power.p_conv + power.xi * output;
}

SurfaceBudget surface_budget(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams,
                             const NetworkScenario& s) {
  SurfaceBudget b;
  for (int m = 0; m < cfg.elements(); ++m) {
    b.harvested += harvested_power(rf_power_element(h.row(m), beams, cfg.alpha[m], s.sigma_s2), s.eh);
  }
  b.output = output_power(cfg, h, beams, s.sigma_s2);
  b.consumed = consumed_power(s.power, cfg.directions(), cfg.elements(), b.output);
  return b;
}

double self_sustain_margin(const MfRisConfig& cfg, const CMat& h, std::span<const CVec> beams,
                           const NetworkScenario& s) {
  return surface_budget(cfg, h, beams, s).margin();
}

}  // namespace mfris
