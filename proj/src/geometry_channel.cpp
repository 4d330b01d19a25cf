#include "mfris/geometry_channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfris {

double pathloss(double distance, double h0, double k0) {
  if (!(distance > 0.0)) throw std::domain_error("pathloss: distance must be positive");
  return h0 * std::pow(distance, -k0);
}

CVec ula_steering(int n_elems, double spacing_ratio, double spatial_term) {
  if (n_elems < 1) throw std::invalid_argument("ula_steering: n_elems must be >= 1");
  CVec a(n_elems);
  const double step = -kTwoPi * spacing_ratio * spatial_term;
  for (int i = 0; i < n_elems; ++i) a[i] = std::polar(1.0, step * i);
  return a;
}

Angles angles_between(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  if (d.norm() == 0.0) throw std::domain_error("angles_between: coincident positions");
  return {std::atan2(d.y(), d.x()), std::atan2(d.z(), std::hypot(d.x(), d.y()))};
}

CMat los_bs_to_ris(const NetworkScenario& s, const Vec3& surface_pos) {
  // Arrival at the surface (looking back toward the BS) and departure at the BS.
  const Angles arr = angles_between(surface_pos, s.bs_position);
  const Angles dep = angles_between(s.bs_position, surface_pos);
  const CVec vert = ula_steering(s.elements_v, s.element_spacing_ratio,
                                 std::sin(arr.azimuth) * std::sin(arr.elevation));
  const CVec horz = ula_steering(s.elements_h, s.element_spacing_ratio,
                                 std::sin(arr.azimuth) * std::cos(arr.elevation));
  CVec surface(s.elements());
  for (int v = 0; v < s.elements_v; ++v) {
    surface.segment(v * s.elements_h, s.elements_h) = vert[v] * horz;
  }
  const CVec bs = ula_steering(s.antennas, s.antenna_spacing_ratio,
                               std::sin(dep.azimuth) * std::cos(dep.elevation));
  return surface * bs.transpose();
}

CVec los_bs_to_user(const NetworkScenario& s, const Vec3& user_pos) {
  const Angles dep = angles_between(s.bs_position, user_pos);
  return ula_steering(s.antennas, s.antenna_spacing_ratio,
                      std::sin(dep.azimuth) * std::sin(dep.elevation));
}

CVec los_ris_to_user(const NetworkScenario& s, const Vec3& surface_pos, const Vec3& user_pos) {
  const Angles dep = angles_between(surface_pos, user_pos);
  return ula_steering(s.elements(), s.element_spacing_ratio,
                      std::sin(dep.azimuth) * std::sin(dep.elevation));
}

CMat draw_cn(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMat out(rows, cols);
  // Column-major fill order keeps draws reproducible across Eigen versions.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(r, c) = cplx(re, im);
    }
  }
  return out;
}

CMat rician_compose(const CMat& los, const CMat& nlos, double beta0, double pathloss_gain) {
  if (!(beta0 >= 0.0)) throw std::invalid_argument("rician: beta0 must be >= 0");
  const double amp = std::sqrt(pathloss_gain);
  if (std::isinf(beta0)) return amp * los;
  const double w_los = std::sqrt(beta0 / (beta0 + 1.0));
  const double w_nlos = std::sqrt(1.0 / (beta0 + 1.0));
  return amp * (w_los * los + w_nlos * nlos);
}

CMat rician_channel(const CMat& los, double beta0, double pathloss_gain, Rng& rng) {
  const CMat nlos = draw_cn(static_cast<int>(los.rows()), static_cast<int>(los.cols()), rng);
  return rician_compose(los, nlos, beta0, pathloss_gain);
}

NlosDraws NlosDraws::draw(const NetworkScenario& s, Rng& rng) {
  NlosDraws d;
  const int m = s.elements();
  const int n = s.antennas;
  const int users = s.total_users();
  d.bs_ris.reserve(s.surfaces);
  for (int q = 0; q < s.surfaces; ++q) d.bs_ris.push_back(draw_cn(m, n, rng));
  d.bs_user.reserve(users);
  for (int u = 0; u < users; ++u) d.bs_user.push_back(draw_cn(n, 1, rng));
  d.ris_user.resize(s.surfaces);
  for (int q = 0; q < s.surfaces; ++q) {
    for (int u = 0; u < users; ++u) d.ris_user[q].push_back(draw_cn(m, 1, rng));
  }
  return d;
}

bool ChannelRealization::all_finite() const {
  auto finite = [](const auto& x) { return x.array().isFinite().all(); };
  for (const auto& h : bs_ris) if (!finite(h)) return false;
  for (const auto& h : direct) if (!finite(h)) return false;
  for (const auto& per_q : ris_user)
    for (const auto& r : per_q) if (!finite(r)) return false;
  return true;
}

ChannelRealization build_channels(const NetworkScenario& s, const Placement& p, NlosDraws nlos) {
  const int users = s.total_users();
  if (static_cast<int>(p.users.size()) != users || static_cast<int>(p.surfaces.size()) != s.surfaces) {
    throw std::invalid_argument("build_channels: placement does not match scenario");
  }
  ChannelRealization ch;
  ch.bs_ris.reserve(s.surfaces);
  for (int q = 0; q < s.surfaces; ++q) {
    const double gain = pathloss((p.surfaces[q] - s.bs_position).norm(), s.h0, s.k0);
    ch.bs_ris.push_back(rician_compose(los_bs_to_ris(s, p.surfaces[q]), nlos.bs_ris[q], s.beta0, gain));
  }
  ch.direct.reserve(users);
  for (int u = 0; u < users; ++u) {
    const double gain = pathloss((p.users[u] - s.bs_position).norm(), s.h0, s.k0);
    ch.direct.push_back(rician_compose(los_bs_to_user(s, p.users[u]), nlos.bs_user[u], s.beta0, gain));
  }
  ch.ris_user.resize(s.surfaces);
  for (int q = 0; q < s.surfaces; ++q) {
    ch.ris_user[q].reserve(users);
    for (int u = 0; u < users; ++u) {
      const double gain = pathloss((p.users[u] - p.surfaces[q]).norm(), s.h0, s.k0);
      ch.ris_user[q].push_back(
          rician_compose(los_ris_to_user(s, p.surfaces[q], p.users[u]), nlos.ris_user[q][u], s.beta0, gain));
    }
  }
  ch.nlos = std::move(nlos);
  return ch;
}

CRow cascaded_channel(const CVec& r, const CDiag& theta, const CMat& h) {
  if (r.size() != theta.rows() || theta.cols() != h.rows()) {
    throw std::invalid_argument("cascaded_channel: dimension mismatch");
  }
  return r.adjoint() * theta * h;
}

CRow combined_channel(const CVec& direct, std::span<const CRow> cascaded) {
  CRow g = direct.adjoint();
  for (const auto& c : cascaded) {
    if (c.size() != g.size()) throw std::invalid_argument("combined_channel: dimension mismatch");
    g += c;
  }
  return g;
}

bool reflection_side(const Vec3& bs_pos, const Vec3& surface_pos, const Vec3& user_pos) {
  const double bs_side = bs_pos.x() - surface_pos.x();
  const double user_side = user_pos.x() - surface_pos.x();
  return bs_side * user_side > 0.0;
}

}  // namespace mfris
