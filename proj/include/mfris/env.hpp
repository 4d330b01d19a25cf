#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfris/geometry_channel.hpp"
#include "mfris/mfris_model.hpp"
#include "mfris/noma_phy.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

/// Surfaces are agents 1..Q, the BS is agent Q + 1.
struct AgentId {
  enum class Kind { Surface, Bs };
  Kind kind = Kind::Surface;
  int index = 1;

  static AgentId surface(int q) { return {Kind::Surface, q + 1}; }
  static AgentId bs(int surfaces) { return {Kind::Bs, surfaces + 1}; }
  bool is_bs() const { return kind == Kind::Bs; }
};

enum class Access { Noma, Oma, Sdma };
std::string access_name(Access a);

struct EnvOptions {
  int horizon = 200;
  bool fixed_users = false;
  std::uint64_t user_seed = 0;  ///< used when fixed_users is set
  bool freeze_fading = false;
  bool force_alpha_one = false;
  bool force_beta_one = false;
  /// Surfaces cannot serve users on the far side of their plane.
  bool reflect_only = false;
  Access access = Access::Noma;
  PenaltyWeights weights;
};

/// One surface agent's decision: mode bits plus raw continuous outputs
/// (beta logits K x M, theta logits K x M, one position logit).
struct SurfaceAction {
  std::vector<std::uint8_t> alpha;
  Eigen::VectorXd raw;
};

struct JointAction {
  std::vector<SurfaceAction> surfaces;
  Eigen::VectorXd bs_raw;
};

struct Observation {
  std::vector<Eigen::VectorXd> surface;  ///< [q], channel features
  Eigen::VectorXd bs;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  EeReport report;
  bool done = false;
};

double sigmoid(double x);
double logit(double p);

/// Maps raw outputs onto the feasible set: beta in [0, beta_max], theta in
/// [0, 2 pi), y inside the deployment box (x and z at the box midpoint).
MfRisConfig project_surface_action(const NetworkScenario& scenario, std::span<const std::uint8_t> alpha,
                                   const Eigen::VectorXd& raw, bool force_beta_one = false);

/// Per-direction softmax for the power split; beams are the raw (Re, Im)
/// pairs scaled by sqrt(P_max / (2 N B)) with B beams. Beam power is left
/// unconstrained.
BsConfig project_bs_action(const NetworkScenario& scenario, const Eigen::VectorXd& raw);
/// One beam per user, no power split.
std::vector<CVec> project_sdma_beams(const NetworkScenario& scenario, const Eigen::VectorXd& raw);

/// concat(channel features, previous mode bits).
Eigen::VectorXd shared_state_for_ppo(AgentId agent, const Eigen::VectorXd& features,
                                     std::span<const std::uint8_t> prev_alpha);

/// Uniform point in the ground-level disk of `radius` around `center`.
Vec3 draw_in_disk(const Vec3& center, double radius, Rng& rng);

/// Multi-agent environment: Q surface agents and one BS agent sharing a
/// single reward.
///
/// A step applies the projected actions, rebuilds the channels for the new
/// surface positions with the current fading, evaluates the resulting
/// configuration, then redraws fading and encodes the next observation.
class MultiAgentEnv {
 public:
  MultiAgentEnv(NetworkScenario scenario, EnvOptions options);

  const NetworkScenario& scenario() const { return scenario_; }
  const EnvOptions& options() const { return opts_; }
  int num_agents() const { return scenario_.surfaces + 1; }

  int surface_state_dim() const;
  int bs_state_dim() const;
  int surface_raw_dim() const;
  int bs_raw_dim() const;

  double surface_feature_scale() const { return surface_scale_; }
  double bs_feature_scale() const { return bs_scale_; }

  Observation reset(std::uint64_t seed);
  StepResult step(const JointAction& action);

  int t() const { return t_; }
  const Placement& placement() const { return placement_; }
  const ChannelRealization& channels() const { return channels_; }
  const std::vector<MfRisConfig>& surface_configs() const { return configs_; }
  const std::vector<CVec>& beams() const { return beams_; }

  /// Rebuilds the channels for the current placement and fading, with
  /// far-side links removed when reflect_only is set.
  ChannelRealization current_channels() const;
  /// Evaluates an explicit configuration against `channels`.
  EeReport evaluate_config(const ChannelRealization& channels, std::span<const MfRisConfig> surfaces,
                           const BsConfig& bs, std::span<const CVec> sdma_beams) const;

 private:
  Observation encode() const;

  NetworkScenario scenario_;
  EnvOptions opts_;
  double surface_scale_ = 1.0;
  double bs_scale_ = 1.0;
  Rng rng_;
  int t_ = 0;
  Placement placement_;
  NlosDraws nlos_;
  ChannelRealization channels_;
  std::vector<MfRisConfig> configs_;
  BsConfig bs_;
  std::vector<CVec> beams_;
};

}  // namespace mfris
