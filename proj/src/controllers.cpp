#include "mfris/controllers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfris {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LearnStats empty_stats() { return {kNaN, kNaN, kNaN, kNaN}; }

// Running mean that stays NaN until the first sample.
struct Mean {
  double sum = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    ++n;
  }
  double get() const { return n ? sum / n : kNaN; }
};

std::string agent_prefix(int id) { return "agent" + std::to_string(id) + "."; }

void check_id(int id, int n) {
  if (id < 1 || id > n) throw std::out_of_range("agent id out of range: " + std::to_string(id));
}

}  // namespace

Rng agent_rng(std::uint64_t seed, int agent_id, int purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(agent_id), static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------

LearningController::LearningController(const MultiAgentEnv& env, const AgentConfigs& cfg, std::uint64_t seed,
                                       SurfaceMode mode, bool sharing)
    : mode_(mode),
      sharing_(sharing && mode == SurfaceMode::Hybrid),
      elements_(env.scenario().elements()),
      surface_raw_dim_(env.surface_raw_dim()) {
  const int q_count = env.scenario().surfaces;
  for (int q = 0; q < q_count; ++q) {
    const int id = q + 1;
    Rng init = agent_rng(seed, id, 0);
    SurfaceAgent a;
    if (mode_ == SurfaceMode::Hybrid) {
      a.dqn.emplace(env.surface_state_dim(), std::vector<int>(elements_, 2), cfg.dqn, init);
    }
    const int state_dim = env.surface_state_dim() + (sharing_ ? elements_ : 0);
    const int action_dim = surface_raw_dim_ + (mode_ == SurfaceMode::RelaxedAlpha ? elements_ : 0);
    a.ppo = agents::PpoAgent(state_dim, action_dim, cfg.ppo, init);
    a.prev_alpha.assign(elements_, 1);
    a.alpha.assign(elements_, 1);
    a.rng = agent_rng(seed, id, 1);
    surfaces_.push_back(std::move(a));
  }
  const int bs_id = q_count + 1;
  Rng init = agent_rng(seed, bs_id, 0);
  bs_.ppo = agents::PpoAgent(env.bs_state_dim(), env.bs_raw_dim(), cfg.ppo, init);
  bs_.rng = agent_rng(seed, bs_id, 1);
}

Eigen::VectorXd LearningController::ppo_state(int q, const Eigen::VectorXd& features) const {
  if (!sharing_) return features;
  return shared_state_for_ppo(AgentId::surface(q), features, surfaces_.at(q).prev_alpha);
}

JointAction LearningController::act(const Observation& obs, bool deterministic) {
  JointAction ja;
  for (std::size_t q = 0; q < surfaces_.size(); ++q) {
    auto& a = surfaces_[q];
    const Eigen::VectorXd& feat = obs.surface[q];
    if (a.dqn) {
      a.dqn_state = feat;
      const auto bits = deterministic ? a.dqn->greedy(feat) : a.dqn->select(feat, a.dqn->epsilon(), a.rng);
      for (int m = 0; m < elements_; ++m) a.alpha[m] = static_cast<std::uint8_t>(bits[m]);
    }
    Pending& p = a.pending;
    p.state = ppo_state(static_cast<int>(q), feat);
    if (deterministic) {
      p.action = a.ppo.mean_action(p.state);
    } else {
      auto s = a.ppo.act(p.state, a.rng);
      p.action = std::move(s.action);
      p.log_prob = s.log_prob;
      p.value = s.value;
    }
    SurfaceAction sa;
    sa.raw = p.action.head(surface_raw_dim_);
    if (mode_ == SurfaceMode::RelaxedAlpha) {
      // sigmoid(x) > 0.5 <=> x > 0
      for (int m = 0; m < elements_; ++m) a.alpha[m] = p.action[surface_raw_dim_ + m] > 0.0 ? 1 : 0;
    }
    sa.alpha = a.alpha;
    a.prev_alpha = a.alpha;
    ja.surfaces.push_back(std::move(sa));
  }
  Pending& p = bs_.pending;
  p.state = obs.bs;
  if (deterministic) {
    p.action = bs_.ppo.mean_action(p.state);
  } else {
    auto s = bs_.ppo.act(p.state, bs_.rng);
    p.action = std::move(s.action);
    p.log_prob = s.log_prob;
    p.value = s.value;
  }
  ja.bs_raw = p.action;
  return ja;
}

LearnStats LearningController::observe(const Observation& next, double reward, bool done) {
  Mean dqn_loss, clip_obj, value_loss, eps;
  auto ppo_observe = [&](agents::PpoAgent& ppo, Pending& p, const Eigen::VectorXd& next_state, Rng& rng) {
    ppo.record({p.state, p.action, p.log_prob, reward, p.value});
    if (ppo.trajectory_full() || done) {
      const auto st = ppo.update(ppo.value(next_state), rng);
      clip_obj.add(st.clip_objective);
      value_loss.add(st.value_loss);
    }
  };
  for (std::size_t q = 0; q < surfaces_.size(); ++q) {
    auto& a = surfaces_[q];
    if (a.dqn) {
      std::vector<int> bits(a.alpha.begin(), a.alpha.end());
      // Time-limit truncation is not a terminal state.
      a.dqn->buffer().push({a.dqn_state, std::move(bits), reward, next.surface[q], false});
      a.dqn->advance();
      eps.add(a.dqn->epsilon());
      if (a.dqn->ready()) dqn_loss.add(a.dqn->update(a.rng));
    }
    // prev_alpha already holds alpha(t), which is what the next PPO state uses.
    ppo_observe(a.ppo, a.pending, ppo_state(static_cast<int>(q), next.surface[q]), a.rng);
    if (done) a.prev_alpha.assign(elements_, 1);
  }
  ppo_observe(bs_.ppo, bs_.pending, next.bs, bs_.rng);
  return {dqn_loss.get(), clip_obj.get(), value_loss.get(), eps.get()};
}

void LearningController::save_agent(int id, Archive& ar) const {
  check_id(id, num_agents());
  const std::string p = agent_prefix(id);
  if (id == num_agents()) {
    bs_.ppo.save(ar, p + "ppo.");
    ar.put_rng(p + "rng", bs_.rng);
    return;
  }
  const auto& a = surfaces_[id - 1];
  if (a.dqn) a.dqn->save(ar, p + "dqn.");
  a.ppo.save(ar, p + "ppo.");
  ar.put_rng(p + "rng", a.rng);
  ar.put_ints(p + "prev_alpha", std::vector<int>(a.prev_alpha.begin(), a.prev_alpha.end()));
}

void LearningController::load_agent(int id, const Archive& ar) {
  check_id(id, num_agents());
  const std::string p = agent_prefix(id);
  if (id == num_agents()) {
    bs_.ppo.load(ar, p + "ppo.");
    ar.get_rng(p + "rng", bs_.rng);
    return;
  }
  auto& a = surfaces_[id - 1];
  if (a.dqn) a.dqn->load(ar, p + "dqn.");
  a.ppo.load(ar, p + "ppo.");
  ar.get_rng(p + "rng", a.rng);
  const auto bits = ar.ints(p + "prev_alpha");
  a.prev_alpha.assign(bits.begin(), bits.end());
}

// ---------------------------------------------------------------------------

QuantizedDqnController::QuantizedDqnController(const MultiAgentEnv& env, const AgentConfigs& cfg,
                                               std::uint64_t seed)
    : scenario_(env.scenario()), access_(env.options().access) {
  if (access_ == Access::Sdma) throw std::invalid_argument("pure_dqn does not support SDMA beams");
  for (int q = 0; q <= scenario_.surfaces; ++q) {
    const int id = q + 1;
    const bool is_bs = q == scenario_.surfaces;
    Rng init = agent_rng(seed, id, 0);
    agents_.push_back({agents::DqnAgent(is_bs ? env.bs_state_dim() : env.surface_state_dim(),
                                        is_bs ? bs_heads() : surface_heads(), cfg.dqn, init),
                       agent_rng(seed, id, 1), {}, {}});
  }
}

std::vector<int> QuantizedDqnController::surface_heads() const {
  const int m = scenario_.elements();
  const int km = scenario_.directions() * m;
  std::vector<int> heads(m, 2);
  heads.insert(heads.end(), km, scenario_.power.levels_beta);
  heads.insert(heads.end(), km, scenario_.power.levels_theta);
  heads.push_back(kPositionLevels);
  return heads;
}

std::vector<int> QuantizedDqnController::bs_heads() const {
  std::vector<int> heads(scenario_.total_users(), scenario_.power.levels_beta);
  heads.insert(heads.end(), scenario_.directions() * scenario_.antennas, kBeamPhaseLevels);
  heads.insert(heads.end(), scenario_.directions(), scenario_.power.levels_beta);
  return heads;
}

Eigen::VectorXd QuantizedDqnController::surface_raw(const std::vector<int>& c) const {
  const int m = scenario_.elements();
  const int km = scenario_.directions() * m;
  const int lb = scenario_.power.levels_beta;
  const int lt = scenario_.power.levels_theta;
  // Levels sit at bin midpoints so that every one has a finite logit.
  auto mid = [](int level, int levels) { return logit((level + 0.5) / levels); };
  Eigen::VectorXd raw(2 * km + 1);
  for (int i = 0; i < km; ++i) {
    raw[i] = mid(c[m + i], lb);
    raw[km + i] = mid(c[m + km + i], lt);
  }
  raw[2 * km] = mid(c[m + 2 * km], kPositionLevels);
  return raw;
}

Eigen::VectorXd QuantizedDqnController::bs_raw(const std::vector<int>& c) const {
  const int users = scenario_.total_users();
  const int n = scenario_.antennas;
  const int k_count = scenario_.directions();
  const int lb = scenario_.power.levels_beta;
  Eigen::VectorXd raw(users + 2 * n * k_count);
  for (int u = 0; u < users; ++u) raw[u] = -2.0 + 4.0 * c[u] / (lb - 1);
  for (int k = 0; k < k_count; ++k) {
    // Per-beam power P_max / K * 10^(-4 (1 - l / (L - 1))), log-spaced.
    const int level = c[users + k_count * n + k];
    const double amp = std::sqrt(2.0 * std::pow(10.0, -4.0 * (1.0 - static_cast<double>(level) / (lb - 1))));
    for (int i = 0; i < n; ++i) {
      const double phase = kTwoPi * c[users + k * n + i] / kBeamPhaseLevels;
      raw[users + 2 * (k * n + i)] = amp * std::cos(phase);
      raw[users + 2 * (k * n + i) + 1] = amp * std::sin(phase);
    }
  }
  return raw;
}

JointAction QuantizedDqnController::act(const Observation& obs, bool deterministic) {
  JointAction ja;
  const int m = scenario_.elements();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& a = agents_[i];
    const bool is_bs = static_cast<int>(i) == scenario_.surfaces;
    a.state = is_bs ? obs.bs : obs.surface[i];
    a.choice = deterministic ? a.dqn.greedy(a.state) : a.dqn.select(a.state, a.dqn.epsilon(), a.rng);
    if (is_bs) {
      ja.bs_raw = bs_raw(a.choice);
    } else {
      SurfaceAction sa;
      sa.alpha.assign(a.choice.begin(), a.choice.begin() + m);
      sa.raw = surface_raw(a.choice);
      ja.surfaces.push_back(std::move(sa));
    }
  }
  return ja;
}

LearnStats QuantizedDqnController::observe(const Observation& next, double reward, bool) {
  Mean loss, eps;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& a = agents_[i];
    const bool is_bs = static_cast<int>(i) == scenario_.surfaces;
    a.dqn.buffer().push({a.state, a.choice, reward, is_bs ? next.bs : next.surface[i], false});
    a.dqn.advance();
    eps.add(a.dqn.epsilon());
    if (a.dqn.ready()) loss.add(a.dqn.update(a.rng));
  }
  return {loss.get(), kNaN, kNaN, eps.get()};
}

void QuantizedDqnController::save_agent(int id, Archive& ar) const {
  check_id(id, num_agents());
  const std::string p = agent_prefix(id);
  agents_[id - 1].dqn.save(ar, p + "dqn.");
  ar.put_rng(p + "rng", agents_[id - 1].rng);
}

void QuantizedDqnController::load_agent(int id, const Archive& ar) {
  check_id(id, num_agents());
  const std::string p = agent_prefix(id);
  agents_[id - 1].dqn.load(ar, p + "dqn.");
  ar.get_rng(p + "rng", agents_[id - 1].rng);
}

// ---------------------------------------------------------------------------

RandomController::RandomController(const MultiAgentEnv& env, std::uint64_t seed)
    : scenario_(env.scenario()),
      access_(env.options().access),
      surface_raw_dim_(env.surface_raw_dim()),
      bs_raw_dim_(env.bs_raw_dim()) {
  for (int id = 1; id <= scenario_.surfaces + 1; ++id) rngs_.push_back(agent_rng(seed, id, 1));
}

JointAction RandomController::act(const Observation&, bool) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  const double beam_half_width = std::sqrt(3.0);  // unit variance per raw beam entry
  std::uniform_real_distribution<double> beam(-beam_half_width, beam_half_width);
  auto open_unit = [&](Rng& rng) {
    double u;
    do u = unit(rng);
    while (u <= 0.0);
    return u;
  };

  JointAction ja;
  const int m = scenario_.elements();
  for (int q = 0; q < scenario_.surfaces; ++q) {
    Rng& rng = rngs_[q];
    SurfaceAction sa;
    sa.alpha.resize(m);
    for (auto& b : sa.alpha) b = unit(rng) < 0.5 ? 0 : 1;
    sa.raw.resize(surface_raw_dim_);
    // logit(U) maps to a uniform projected value.
    for (Eigen::Index i = 0; i < sa.raw.size(); ++i) sa.raw[i] = logit(open_unit(rng));
    ja.surfaces.push_back(std::move(sa));
  }
  Rng& rng = rngs_.back();
  ja.bs_raw.resize(bs_raw_dim_);
  Eigen::Index i = 0;
  if (access_ != Access::Sdma) {
    // Softmax of log-exponentials is a uniform draw from the simplex.
    for (; i < scenario_.total_users(); ++i) ja.bs_raw[i] = std::log(expo(rng));
  }
  for (; i < bs_raw_dim_; ++i) ja.bs_raw[i] = beam(rng);
  return ja;
}

LearnStats RandomController::observe(const Observation&, double, bool) { return empty_stats(); }

void RandomController::save_agent(int id, Archive& ar) const {
  check_id(id, num_agents());
  ar.put_rng(agent_prefix(id) + "rng", rngs_[id - 1]);
}

void RandomController::load_agent(int id, const Archive& ar) {
  check_id(id, num_agents());
  ar.get_rng(agent_prefix(id) + "rng", rngs_[id - 1]);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Controller> make_controller(Variant v, const MultiAgentEnv& env, const AgentConfigs& cfg,
                                            std::uint64_t seed) {
  using Mode = LearningController::SurfaceMode;
  switch (v) {
    case Variant::Random:
      return std::make_unique<RandomController>(env, seed);
    case Variant::PureDqn:
      return std::make_unique<QuantizedDqnController>(env, cfg, seed);
    case Variant::PurePpo:
      return std::make_unique<LearningController>(env, cfg, seed, Mode::RelaxedAlpha, false);
    case Variant::NoSharing:
      return std::make_unique<LearningController>(env, cfg, seed, Mode::Hybrid, false);
    case Variant::NoEh:
    case Variant::ReflectOnly:
      return std::make_unique<LearningController>(env, cfg, seed, Mode::ContinuousOnly, false);
    default:
      return std::make_unique<LearningController>(env, cfg, seed, Mode::Hybrid, true);
  }
}

}  // namespace mfris
