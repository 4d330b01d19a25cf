#include "mfris/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfris/baselines.hpp"
#include "mfris/nn.hpp"

namespace mfris {

std::string access_name(Access a) {
  switch (a) {
    case Access::Noma: return "noma";
    case Access::Oma: return "oma";
    case Access::Sdma: return "sdma";
  }
  return "?";
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

void require_finite(const Eigen::VectorXd& raw, const char* what) {
  if (!raw.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite raw action");
}

double median(std::vector<double> v) {
  if (v.empty()) return 1.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void push_complex(Eigen::VectorXd& out, Eigen::Index& at, const CRow& row, double scale) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    out[at++] = scale * row[i].real();
    out[at++] = scale * row[i].imag();
  }
}

}  // namespace

MfRisConfig project_surface_action(const NetworkScenario& s, std::span<const std::uint8_t> alpha,
                                   const Eigen::VectorXd& raw, bool force_beta_one) {
  const int k_count = s.directions();
  const int m_count = s.elements();
  if (static_cast<int>(alpha.size()) != m_count) throw std::invalid_argument("surface action: alpha length");
  if (raw.size() != 2 * k_count * m_count + 1) throw std::invalid_argument("surface action: raw length");
  require_finite(raw, "surface action");

  MfRisConfig cfg;
  cfg.alpha.assign(alpha.begin(), alpha.end());
  cfg.beta.resize(k_count, m_count);
  cfg.theta.resize(k_count, m_count);
  const double theta_cap = std::nextafter(kTwoPi, 0.0);
  const Eigen::Index km = static_cast<Eigen::Index>(k_count) * m_count;
  for (int k = 0; k < k_count; ++k) {
    for (int m = 0; m < m_count; ++m) {
      const Eigen::Index i = static_cast<Eigen::Index>(k) * m_count + m;
      cfg.beta(k, m) = force_beta_one ? 1.0 : s.beta_max * sigmoid(raw[i]);
      cfg.theta(k, m) = std::min(kTwoPi * sigmoid(raw[km + i]), theta_cap);
    }
  }
  cfg.position = s.deploy_mid();
  cfg.position.y() = s.deploy_min.y() + (s.deploy_max.y() - s.deploy_min.y()) * sigmoid(raw[2 * km]);
  return cfg;
}

BsConfig project_bs_action(const NetworkScenario& s, const Eigen::VectorXd& raw) {
  const int users = s.total_users();
  const int n = s.antennas;
  const int k_count = s.directions();
  if (raw.size() != users + 2 * n * k_count) throw std::invalid_argument("bs action: raw length");
  require_finite(raw, "bs action");

  std::vector<int> groups(k_count);
  for (int k = 0; k < k_count; ++k) groups[k] = s.users_in(k);
  const Eigen::VectorXd p = nn::softmax_groups(raw.head(users), groups);

  BsConfig bs;
  const double scale = std::sqrt(s.p_bs_max / (2.0 * n * k_count));
  for (int k = 0; k < k_count; ++k) {
    std::vector<double> row(s.users_in(k));
    for (int j = 0; j < s.users_in(k); ++j) row[j] = p[s.user_index(k, j)];
    bs.power_fractions.push_back(std::move(row));
    CVec f(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Index at = users + 2 * (static_cast<Eigen::Index>(k) * n + i);
      f[i] = scale * cplx(raw[at], raw[at + 1]);
    }
    bs.beams.push_back(std::move(f));
  }
  return bs;
}

std::vector<CVec> project_sdma_beams(const NetworkScenario& s, const Eigen::VectorXd& raw) {
  const int users = s.total_users();
  const int n = s.antennas;
  if (raw.size() != 2 * n * users) throw std::invalid_argument("sdma action: raw length");
  require_finite(raw, "sdma action");
  const double scale = std::sqrt(s.p_bs_max / (2.0 * n * users));
  std::vector<CVec> beams;
  for (int u = 0; u < users; ++u) {
    CVec f(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Index at = 2 * (static_cast<Eigen::Index>(u) * n + i);
      f[i] = scale * cplx(raw[at], raw[at + 1]);
    }
    beams.push_back(std::move(f));
  }
  return beams;
}

Eigen::VectorXd shared_state_for_ppo(AgentId agent, const Eigen::VectorXd& features,
                                     std::span<const std::uint8_t> prev_alpha) {
  if (agent.is_bs()) throw std::invalid_argument("shared_state_for_ppo: the BS has no discrete sub-agent");
  Eigen::VectorXd out(features.size() + static_cast<Eigen::Index>(prev_alpha.size()));
  out.head(features.size()) = features;
  for (std::size_t m = 0; m < prev_alpha.size(); ++m) {
    out[features.size() + static_cast<Eigen::Index>(m)] = prev_alpha[m];
  }
  return out;
}

Vec3 draw_in_disk(const Vec3& center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double phi = kTwoPi * u(rng);
  return {center.x() + r * std::cos(phi), center.y() + r * std::sin(phi), center.z()};
}

MultiAgentEnv::MultiAgentEnv(NetworkScenario scenario, EnvOptions options)
    : scenario_(std::move(scenario)), opts_(options) {
  scenario_.validate();
  if (opts_.horizon <= 0) throw std::invalid_argument("EnvOptions: horizon must be positive");

  const Vec3 mid = scenario_.deploy_mid();
  std::vector<double> direct, cascaded;
  for (const auto& [k, j] : scenario_.user_list()) {
    const Vec3& c = scenario_.user_centers[k][j];
    direct.push_back(pathloss((c - scenario_.bs_position).norm(), scenario_.h0, scenario_.k0));
    cascaded.push_back(pathloss((mid - scenario_.bs_position).norm(), scenario_.h0, scenario_.k0) *
                       pathloss((c - mid).norm(), scenario_.h0, scenario_.k0) * scenario_.elements());
  }
  bs_scale_ = 1.0 / std::sqrt(median(direct));
  surface_scale_ = 1.0 / std::sqrt(median(cascaded));
}

int MultiAgentEnv::surface_state_dim() const { return 2 * scenario_.total_users() * scenario_.antennas; }
int MultiAgentEnv::bs_state_dim() const { return 2 * scenario_.total_users() * scenario_.antennas; }
int MultiAgentEnv::surface_raw_dim() const { return 2 * scenario_.directions() * scenario_.elements() + 1; }
int MultiAgentEnv::bs_raw_dim() const {
  const int n = scenario_.antennas;
  if (opts_.access == Access::Sdma) return 2 * n * scenario_.total_users();
  return scenario_.total_users() + 2 * n * scenario_.directions();
}

Observation MultiAgentEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  t_ = 0;
  placement_ = {};
  Rng user_rng(opts_.user_seed);
  Rng& pos_rng = opts_.fixed_users ? user_rng : rng_;
  for (const auto& [k, j] : scenario_.user_list()) {
    placement_.users.push_back(draw_in_disk(scenario_.user_centers[k][j], scenario_.user_drop_radius, pos_rng));
  }
  placement_.surfaces.assign(scenario_.surfaces, scenario_.deploy_mid());
  nlos_ = NlosDraws::draw(scenario_, rng_);

  configs_.clear();
  for (int q = 0; q < scenario_.surfaces; ++q) {
    configs_.push_back(MfRisConfig::neutral(scenario_.directions(), scenario_.elements(), scenario_.deploy_mid()));
  }
  // Equal-power beams with random phases; total power P_max.
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const int n = scenario_.antennas;
  const int beam_count = opts_.access == Access::Sdma ? scenario_.total_users() : scenario_.directions();
  const double amp = std::sqrt(scenario_.p_bs_max / (static_cast<double>(n) * beam_count));
  beams_.clear();
  for (int b = 0; b < beam_count; ++b) {
    CVec f(n);
    for (int i = 0; i < n; ++i) f[i] = std::polar(amp, phase(rng_));
    beams_.push_back(std::move(f));
  }
  bs_ = {};
  for (int k = 0; k < scenario_.directions(); ++k) {
    bs_.power_fractions.emplace_back(scenario_.users_in(k), 1.0 / scenario_.users_in(k));
  }
  if (opts_.access != Access::Sdma) bs_.beams = beams_;

  channels_ = current_channels();
  return encode();
}

ChannelRealization MultiAgentEnv::current_channels() const {
  ChannelRealization ch = build_channels(scenario_, placement_, nlos_);
  if (opts_.reflect_only) {
    for (int q = 0; q < scenario_.surfaces; ++q) {
      for (int u = 0; u < scenario_.total_users(); ++u) {
        if (!reflection_side(scenario_.bs_position, placement_.surfaces[q], placement_.users[u])) {
          ch.ris_user[q][u].setZero();
        }
      }
    }
  }
  return ch;
}

EeReport MultiAgentEnv::evaluate_config(const ChannelRealization& ch, std::span<const MfRisConfig> surfaces,
                                        const BsConfig& bs, std::span<const CVec> sdma_beams) const {
  switch (opts_.access) {
    case Access::Noma:
      return evaluate(scenario_, ch, bs, surfaces, opts_.weights);
    case Access::Oma: {
      const LinkBudget lb = link_budget(scenario_, ch, surfaces, bs.beams);
      return assemble_report(scenario_, oma_rates(scenario_, lb.combined, bs.beams), bs.beam_power(),
                             surface_budgets(scenario_, ch, surfaces, bs.beams), opts_.weights);
    }
    case Access::Sdma: {
      const LinkBudget lb = link_budget(scenario_, ch, surfaces, sdma_beams);
      double power = 0.0;
      for (const auto& f : sdma_beams) power += f.squaredNorm();
      return assemble_report(scenario_, sdma_rates(scenario_, lb), power,
                             surface_budgets(scenario_, ch, surfaces, sdma_beams), opts_.weights);
    }
  }
  throw std::logic_error("unknown access scheme");
}

StepResult MultiAgentEnv::step(const JointAction& action) {
  if (static_cast<int>(action.surfaces.size()) != scenario_.surfaces) {
    throw std::invalid_argument("step: one action per surface required");
  }
  const std::vector<std::uint8_t> all_s(scenario_.elements(), 1);
  for (int q = 0; q < scenario_.surfaces; ++q) {
    const auto& a = action.surfaces[q];
    const std::span<const std::uint8_t> alpha = opts_.force_alpha_one ? std::span(all_s) : std::span(a.alpha);
    configs_[q] = project_surface_action(scenario_, alpha, a.raw, opts_.force_beta_one);
    placement_.surfaces[q] = configs_[q].position;
  }
  if (opts_.access == Access::Sdma) {
    beams_ = project_sdma_beams(scenario_, action.bs_raw);
  } else {
    bs_ = project_bs_action(scenario_, action.bs_raw);
    beams_ = bs_.beams;
  }

  channels_ = current_channels();
  StepResult out;
  out.report = evaluate_config(channels_, configs_, bs_, beams_);
  out.reward = out.report.reward;

  if (!opts_.freeze_fading) {
    nlos_ = NlosDraws::draw(scenario_, rng_);
    channels_ = current_channels();
  }
  ++t_;
  out.obs = encode();
  out.done = t_ >= opts_.horizon;
  return out;
}

Observation MultiAgentEnv::encode() const {
  const int users = scenario_.total_users();
  const int n = scenario_.antennas;
  const auto list = scenario_.user_list();
  Observation obs;
  obs.surface.assign(scenario_.surfaces, Eigen::VectorXd(2 * users * n));
  obs.bs.resize(2 * users * n);

  std::vector<std::vector<CDiag>> thetas(scenario_.surfaces);
  for (int q = 0; q < scenario_.surfaces; ++q) {
    for (int k = 0; k < scenario_.directions(); ++k) thetas[q].push_back(theta_matrix(configs_[q], k));
  }
  std::vector<Eigen::Index> at(scenario_.surfaces, 0);
  Eigen::Index bs_at = 0;
  std::vector<CRow> cascaded(scenario_.surfaces);
  for (int u = 0; u < users; ++u) {
    const int k = list[u].first;
    for (int q = 0; q < scenario_.surfaces; ++q) {
      cascaded[q] = cascaded_channel(channels_.ris_user[q][u], thetas[q][k], channels_.bs_ris[q]);
      push_complex(obs.surface[q], at[q], cascaded[q], surface_scale_);
    }
    push_complex(obs.bs, bs_at, combined_channel(channels_.direct[u], cascaded), bs_scale_);
  }
  return obs;
}

}  // namespace mfris
