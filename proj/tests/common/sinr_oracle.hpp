#pragma once

// Scalar-loop reference for received powers and SINRs, written without the
// library's matrix helpers so it can cross-check them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "mfris/geometry_channel.hpp"
#include "mfris/mfris_model.hpp"
#include "mfris/noma_phy.hpp"

namespace oracle {

using mfris::cplx;

struct UserPowers {
  std::vector<double> beam_gain;  ///< |g_u f_b|^2 per beam
  double ris_noise = 0.0;
};

/// Received scalar of user u through beam f, expanded element by element:
/// sum_n conj(h_n) f_n + sum_q sum_m conj(r_qm) a_m sqrt(b_m) e^{j t_m} sum_n H_qmn f_n.
inline UserPowers expand_user(const mfris::NetworkScenario& s, const mfris::ChannelRealization& ch,
                              const std::vector<mfris::MfRisConfig>& surfaces, const std::vector<mfris::CVec>& beams,
                              int u, int k) {
  UserPowers out;
  for (const auto& f : beams) {
    cplx y(0.0, 0.0);
    for (int n = 0; n < s.antennas; ++n) y += std::conj(ch.direct[u][n]) * f[n];
    for (std::size_t q = 0; q < surfaces.size(); ++q) {
      const auto& cfg = surfaces[q];
      for (int m = 0; m < s.elements(); ++m) {
        if (!cfg.alpha[m]) continue;
        const cplx coef = std::conj(ch.ris_user[q][u][m]) * std::polar(std::sqrt(cfg.beta(k, m)), cfg.theta(k, m));
        cplx hf(0.0, 0.0);
        for (int n = 0; n < s.antennas; ++n) hf += ch.bs_ris[q](m, n) * f[n];
        y += coef * hf;
      }
    }
    out.beam_gain.push_back(std::norm(y));
  }
  for (std::size_t q = 0; q < surfaces.size(); ++q) {
    const auto& cfg = surfaces[q];
    for (int m = 0; m < s.elements(); ++m) {
      if (!cfg.alpha[m]) continue;
      out.ris_noise += s.sigma_s2 * std::norm(ch.ris_user[q][u][m]) * cfg.beta(k, m);
    }
  }
  return out;
}

/// SINR of every user (flat index) under NOMA with SIC.
inline std::vector<double> noma_sinr(const mfris::NetworkScenario& s, const mfris::ChannelRealization& ch,
                                     const std::vector<mfris::MfRisConfig>& surfaces, const mfris::BsConfig& bs) {
  const int users = s.total_users();
  std::vector<UserPowers> pw;
  std::vector<int> dir(users);
  for (int u = 0; u < users; ++u) {
    int k = 0, acc = 0;
    while (u >= acc + s.users_in(k)) acc += s.users_in(k++);
    dir[u] = k;
    pw.push_back(expand_user(s, ch, surfaces, bs.beams, u, k));
  }
  std::vector<double> out(users);
  int base = 0;
  for (int k = 0; k < s.directions(); ++k) {
    const int jn = s.users_in(k);
    // Decoding order: ascending normalized own-beam gain, ties by index.
    std::vector<int> order(jn);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return pw[base + a].beam_gain[k] / (pw[base + a].ris_noise + s.sigma_u2) <
             pw[base + b].beam_gain[k] / (pw[base + b].ris_noise + s.sigma_u2);
    });
    for (int pos = 0; pos < jn; ++pos) {
      const int j = order[pos];
      const auto& p = pw[base + j];
      const double signal = p.beam_gain[k] * bs.power_fractions[k][j];
      double intra = 0.0;
      for (int later = pos + 1; later < jn; ++later) intra += p.beam_gain[k] * bs.power_fractions[k][order[later]];
      double inter = 0.0;
      for (int kb = 0; kb < s.directions(); ++kb) {
        if (kb == k) continue;
        double share = 0.0;
        for (double x : bs.power_fractions[kb]) share += x;
        inter += p.beam_gain[kb] * share;
      }
      out[base + j] = signal / (intra + inter + p.ris_noise + s.sigma_u2);
    }
    base += jn;
  }
  return out;
}

}  // namespace oracle
