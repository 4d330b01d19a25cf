#include "mfris/scenario.hpp"

#include <stdexcept>
#include <string>

namespace mfris {

void EhModelParams::validate() const {
  if (!(max_harvest > 0.0) || !(steepness > 0.0) || !(midpoint > 0.0)) {
    throw std::invalid_argument("EhModelParams: Z, varpi1 and varpi2 must be positive");
  }
}

void PowerModelParams::validate() const {
  if (!(p_pin >= 0.0) || !(p_conv >= 0.0) || !(xi >= 1.0)) {
    throw std::invalid_argument("PowerModelParams: negative power or xi < 1");
  }
  if (levels_alpha < 2 || levels_beta < 2 || levels_theta < 2) {
    throw std::invalid_argument("PowerModelParams: quantization levels must be >= 2");
  }
}

int NetworkScenario::total_users() const {
  int n = 0;
  for (const auto& dir : user_centers) n += static_cast<int>(dir.size());
  return n;
}

int NetworkScenario::max_users_per_direction() const {
  int n = 0;
  for (const auto& dir : user_centers) n = std::max(n, static_cast<int>(dir.size()));
  return n;
}

int NetworkScenario::user_index(int k, int j) const {
  if (k < 0 || k >= directions() || j < 0 || j >= users_in(k)) {
    throw std::out_of_range("user_index: (" + std::to_string(k) + ", " + std::to_string(j) + ")");
  }
  int idx = 0;
  for (int d = 0; d < k; ++d) idx += users_in(d);
  return idx + j;
}

std::vector<std::pair<int, int>> NetworkScenario::user_list() const {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < directions(); ++k) {
    for (int j = 0; j < users_in(k); ++j) out.emplace_back(k, j);
  }
  return out;
}

void NetworkScenario::validate() const {
  if (antennas < 1) throw std::invalid_argument("scenario: antennas must be >= 1");
  if (surfaces < 0) throw std::invalid_argument("scenario: surfaces must be >= 0");
  if (elements_h < 1 || elements_v < 1) throw std::invalid_argument("scenario: element grid must be >= 1x1");
  if (directions() < 1) throw std::invalid_argument("scenario: need at least one direction");
  for (const auto& dir : user_centers) {
    if (dir.empty()) throw std::invalid_argument("scenario: empty direction group");
    for (const auto& c : dir) {
      if (c.z() != 0.0) throw std::invalid_argument("scenario: user centers must lie at z = 0");
    }
  }
  if (!(h0 > 0.0)) throw std::invalid_argument("scenario: h0 must be positive");
  if (!(k0 > 0.0)) throw std::invalid_argument("scenario: k0 must be positive");
  if (!(beta0 >= 0.0)) throw std::invalid_argument("scenario: beta0 must be non-negative");
  if (!(sigma_s2 >= 0.0) || !(sigma_u2 > 0.0)) throw std::invalid_argument("scenario: bad noise powers");
  if (!(user_drop_radius >= 0.0)) throw std::invalid_argument("scenario: negative drop radius");
  if ((deploy_min.array() > deploy_max.array()).any()) {
    throw std::invalid_argument("scenario: deploy_min must be <= deploy_max componentwise");
  }
  if (!(p_bs_max > 0.0) || !(beta_max > 0.0) || !(rate_min >= 0.0)) {
    throw std::invalid_argument("scenario: p_bs_max, beta_max must be positive, rate_min >= 0");
  }
  eh.validate();
  power.validate();
}

NetworkScenario NetworkScenario::full_defaults() {
  NetworkScenario s;
  s.user_centers = {{Vec3(0, 30, 0), Vec3(0, 35, 0)}, {Vec3(10, 40, 0), Vec3(10, 45, 0)}};
  s.antennas = 6;
  s.surfaces = 2;
  s.elements_h = 8;
  s.elements_v = 4;
  return s;
}

NetworkScenario NetworkScenario::desk_defaults() {
  NetworkScenario s = full_defaults();
  s.antennas = 4;
  s.elements_h = 4;
  s.elements_v = 2;
  return s;
}

}  // namespace mfris
