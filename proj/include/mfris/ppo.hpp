#pragma once

#include <span>
#include <vector>

#include "mfris/checkpoint.hpp"
#include "mfris/nn.hpp"

namespace mfris::agents {

struct PpoConfig {
  std::vector<int> hidden{256, 256};
  double lr_actor = 1e-3;
  double lr_critic = 1e-4;
  double gamma = 0.99;
  double lambda = 0.97;
  double clip = 0.2;
  int epochs = 10;
  int minibatch = 64;
  int horizon = 1000;
  double init_log_std = -0.5;
  double entropy_coef = 0.0;
  double policy_output_scale = 0.01;
};

/// Generalized advantage estimates. `values` has T + 1 entries, the last
/// being the bootstrap V(s_T).
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                        double lambda);

/// Rescales to zero mean and unit (population) standard deviation; only
/// centers when the spread is negligible.
std::vector<double> normalize_advantages(std::span<const double> adv);

struct TrajectoryStep {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
};

struct PpoUpdateStats {
  double clip_objective = 0.0;  ///< mean over minibatches
  double value_loss = 0.0;
  // First minibatch of the first epoch, before any parameter change.
  double first_max_ratio_dev = 0.0;
  double first_objective = 0.0;
  double first_mean_advantage = 0.0;
  int minibatches = 0;
};

/// Clipped-surrogate actor-critic with a diagonal Gaussian policy whose
/// log standard deviation is a learned, state-independent vector.
class PpoAgent {
 public:
  PpoAgent() = default;
  PpoAgent(int state_dim, int action_dim, PpoConfig cfg, Rng& init_rng);

  struct Act {
    Eigen::VectorXd action;
    double log_prob = 0.0;
    double value = 0.0;
  };

  const PpoConfig& config() const { return cfg_; }
  int state_dim() const { return policy_.input_size(); }
  int action_dim() const { return policy_.output_size(); }

  Act act(const Eigen::VectorXd& state, Rng& rng) const;
  Eigen::VectorXd mean_action(const Eigen::VectorXd& state) const { return policy_.forward(state); }
  double value(const Eigen::VectorXd& state) const { return value_.forward(state)[0]; }

  void record(TrajectoryStep step);
  std::size_t trajectory_size() const { return traj_.size(); }
  bool trajectory_full() const { return static_cast<int>(traj_.size()) >= cfg_.horizon; }
  const std::vector<TrajectoryStep>& trajectory() const { return traj_; }

  /// Runs the clipped-surrogate and value updates on the stored trajectory,
  /// then refreshes the old-policy snapshot and clears the trajectory.
  PpoUpdateStats update(double bootstrap_value, Rng& rng);

  /// Samples in columns.
  struct PolicyBatch {
    Eigen::MatrixXd states;
    Eigen::MatrixXd actions;
    Eigen::VectorXd advantages;
    Eigen::VectorXd old_log_probs;
  };
  /// mean_i min(O_i A_i, clip(O_i, 1 - c, 1 + c) A_i) plus the optional
  /// entropy bonus; gradients are of this objective (ascent direction).
  double clip_objective(const PolicyBatch& batch, Eigen::VectorXd* grad_mean, Eigen::VectorXd* grad_log_std,
                        Eigen::VectorXd* ratios = nullptr) const;
  /// mean_i (V(s_i) - target_i)^2.
  double value_loss(const Eigen::MatrixXd& states, const Eigen::VectorXd& targets, Eigen::VectorXd* grad) const;

  /// Log-probabilities of `actions` under the old-policy snapshot.
  Eigen::VectorXd old_log_probs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;

  nn::Mlp& policy() { return policy_; }
  const nn::Mlp& policy() const { return policy_; }
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  nn::Mlp& value_net() { return value_; }
  const nn::Mlp& value_net() const { return value_; }
  void snapshot_old_policy();

  void save(Archive& ar, const std::string& prefix) const;
  void load(const Archive& ar, const std::string& prefix);

 private:
  PpoConfig cfg_;
  nn::Mlp policy_;
  Eigen::VectorXd log_std_;
  nn::Mlp old_policy_;
  Eigen::VectorXd old_log_std_;
  nn::Mlp value_;
  nn::AdamState adam_policy_;
  nn::AdamState adam_log_std_;
  nn::AdamState adam_value_;
  std::vector<TrajectoryStep> traj_;
};

}  // namespace mfris::agents
