#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mfris/checkpoint.hpp"
#include "mfris/dqn.hpp"
#include "mfris/env.hpp"
#include "mfris/ppo.hpp"
#include "mfris/variant.hpp"

namespace mfris {

struct AgentConfigs {
  agents::DqnConfig dqn;
  agents::PpoConfig ppo;
};

/// Learning diagnostics produced by one observe() call. NaN means "no
/// update of that kind happened this step".
struct LearnStats {
  double dqn_loss;
  double clip_objective;
  double value_loss;
  double epsilon;
};

/// Drives every agent of an environment: one act() per step, then one
/// observe() with the outcome.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual JointAction act(const Observation& obs, bool deterministic) = 0;
  virtual LearnStats observe(const Observation& next, double reward, bool done) = 0;

  /// Agent ids run 1..Q (surfaces) and Q + 1 (BS).
  virtual int num_agents() const = 0;
  virtual void save_agent(int id, Archive& ar) const = 0;
  virtual void load_agent(int id, const Archive& ar) = 0;
};

/// Independent rng stream for (seed, agent id, purpose).
Rng agent_rng(std::uint64_t seed, int agent_id, int purpose);

/// Hybrid DQN + PPO surface agents and a PPO BS agent. Also covers the
/// variants that bypass the discrete sub-agent (alpha fixed at 1), drop
/// sharing, or relax the mode bits into the PPO action.
class LearningController : public Controller {
 public:
  enum class SurfaceMode { Hybrid, ContinuousOnly, RelaxedAlpha };

  LearningController(const MultiAgentEnv& env, const AgentConfigs& cfg, std::uint64_t seed, SurfaceMode mode,
                     bool sharing);

  JointAction act(const Observation& obs, bool deterministic) override;
  LearnStats observe(const Observation& next, double reward, bool done) override;
  int num_agents() const override { return static_cast<int>(surfaces_.size()) + 1; }
  void save_agent(int id, Archive& ar) const override;
  void load_agent(int id, const Archive& ar) override;

  /// PPO input for surface q given its current features.
  Eigen::VectorXd ppo_state(int q, const Eigen::VectorXd& features) const;
  const agents::DqnAgent* dqn(int q) const { return surfaces_.at(q).dqn ? &*surfaces_.at(q).dqn : nullptr; }
  const agents::PpoAgent& ppo(int q) const { return surfaces_.at(q).ppo; }
  const agents::PpoAgent& bs_ppo() const { return bs_.ppo; }
  const std::vector<std::uint8_t>& prev_alpha(int q) const { return surfaces_.at(q).prev_alpha; }

 private:
  struct Pending {
    Eigen::VectorXd state;
    Eigen::VectorXd action;
    double log_prob = 0.0;
    double value = 0.0;
  };
  struct SurfaceAgent {
    std::optional<agents::DqnAgent> dqn;
    agents::PpoAgent ppo;
    std::vector<std::uint8_t> prev_alpha;
    Rng rng;
    Eigen::VectorXd dqn_state;
    std::vector<std::uint8_t> alpha;
    Pending pending;
  };
  struct BsAgent {
    agents::PpoAgent ppo;
    Rng rng;
    Pending pending;
  };

  void save_rng_and_cache(const SurfaceAgent& a, Archive& ar) const;

  SurfaceMode mode_;
  bool sharing_;
  int elements_;
  int surface_raw_dim_;
  std::vector<SurfaceAgent> surfaces_;
  BsAgent bs_;
};

/// DQN-only control: every continuous output is quantized into a branching
/// head. Surface heads: M mode bits, K*M amplitude levels, K*M phase levels,
/// one position head. BS heads: one power-logit head per user, one phase
/// head per beam entry and one log-spaced power head per beam.
class QuantizedDqnController : public Controller {
 public:
  static constexpr int kPositionLevels = 8;
  static constexpr int kBeamPhaseLevels = 8;

  QuantizedDqnController(const MultiAgentEnv& env, const AgentConfigs& cfg, std::uint64_t seed);

  JointAction act(const Observation& obs, bool deterministic) override;
  LearnStats observe(const Observation& next, double reward, bool done) override;
  int num_agents() const override { return static_cast<int>(agents_.size()); }
  void save_agent(int id, Archive& ar) const override;
  void load_agent(int id, const Archive& ar) override;

  /// Raw surface action for the given head choices.
  Eigen::VectorXd surface_raw(const std::vector<int>& choice) const;
  Eigen::VectorXd bs_raw(const std::vector<int>& choice) const;
  std::vector<int> surface_heads() const;
  std::vector<int> bs_heads() const;

 private:
  struct Agent {
    agents::DqnAgent dqn;
    Rng rng;
    Eigen::VectorXd state;
    std::vector<int> choice;
  };
  NetworkScenario scenario_;
  Access access_;
  std::vector<Agent> agents_;  // surfaces then BS
};

/// Uniformly random actions, no learning.
class RandomController : public Controller {
 public:
  RandomController(const MultiAgentEnv& env, std::uint64_t seed);

  JointAction act(const Observation& obs, bool deterministic) override;
  LearnStats observe(const Observation& next, double reward, bool done) override;
  int num_agents() const override { return scenario_.surfaces + 1; }
  void save_agent(int id, Archive& ar) const override;
  void load_agent(int id, const Archive& ar) override;

 private:
  NetworkScenario scenario_;
  Access access_;
  int surface_raw_dim_;
  int bs_raw_dim_;
  std::vector<Rng> rngs_;  // surfaces then BS
};

std::unique_ptr<Controller> make_controller(Variant v, const MultiAgentEnv& env, const AgentConfigs& cfg,
                                            std::uint64_t seed);

}  // namespace mfris
