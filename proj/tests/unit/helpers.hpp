#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "mfris/env.hpp"
#include "mfris/geometry_channel.hpp"
#include "mfris/noma_phy.hpp"
#include "mfris/scenario.hpp"

namespace testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)}); }

/// Two directions with two users each, small arrays.
inline mfris::NetworkScenario small_scenario(int antennas, int elements_h, int elements_v, int surfaces) {
  auto s = mfris::NetworkScenario::full_defaults();
  s.antennas = antennas;
  s.elements_h = elements_h;
  s.elements_v = elements_v;
  s.surfaces = surfaces;
  return s;
}

inline mfris::Placement random_placement(const mfris::NetworkScenario& s, mfris::Rng& rng) {
  std::uniform_real_distribution<double> y(s.deploy_min.y(), s.deploy_max.y());
  mfris::Placement p;
  for (const auto& [k, j] : s.user_list()) {
    p.users.push_back(mfris::draw_in_disk(s.user_centers[k][j], s.user_drop_radius, rng));
  }
  for (int q = 0; q < s.surfaces; ++q) {
    mfris::Vec3 w = s.deploy_mid();
    w.y() = y(rng);
    p.surfaces.push_back(w);
  }
  return p;
}

inline mfris::MfRisConfig random_surface(const mfris::NetworkScenario& s, const mfris::Vec3& pos, mfris::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto cfg = mfris::MfRisConfig::neutral(s.directions(), s.elements(), pos);
  for (auto& a : cfg.alpha) a = u(rng) < 0.5 ? 0 : 1;
  for (Eigen::Index i = 0; i < cfg.beta.size(); ++i) {
    cfg.beta.data()[i] = s.beta_max * u(rng);
    cfg.theta.data()[i] = mfris::kTwoPi * u(rng) * 0.999;
  }
  return cfg;
}

inline mfris::BsConfig random_bs(const mfris::NetworkScenario& s, double beam_scale, mfris::Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  mfris::BsConfig bs;
  for (int k = 0; k < s.directions(); ++k) {
    std::vector<double> row(s.users_in(k));
    double sum = 0.0;
    for (auto& p : row) sum += (p = u(rng));
    for (auto& p : row) p /= sum;
    bs.power_fractions.push_back(row);
    mfris::CVec f(s.antennas);
    for (auto& x : f) x = beam_scale * mfris::cplx(g(rng), g(rng));
    bs.beams.push_back(f);
  }
  return bs;
}

}  // namespace testing
