#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mfris/checkpoint.hpp"
#include "mfris/nn.hpp"

namespace mfris::agents {

/// Linear epsilon decay: eps(t) = eps(t-1) - (eps_max - eps_min) / decay_steps,
/// clamped at eps_min, with eps(0) = eps_max.
struct EpsilonSchedule {
  double eps_max = 1.0;
  double eps_min = 0.0;
  double decay_steps = 1e4;

  double at(std::int64_t t) const;
};

struct Transition {
  Eigen::VectorXd state;
  std::vector<int> action;  ///< one choice per head
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
};

/// FIFO experience buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Oldest-first logical index.
  const Transition& at(std::size_t i) const;
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;
  void clear();

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::vector<Transition> data_;
};

struct DqnConfig {
  std::vector<int> hidden{256, 256};
  double lr = 1e-3;
  double gamma = 0.99;
  double tau = 1e-2;
  std::size_t capacity = 1'000'000;
  int batch = 64;
  int warmup = 1000;
  EpsilonSchedule eps;
};

/// DQN with action branching: a shared trunk emits one Q-value group per
/// discrete head (sizes given at construction). TD targets are formed per
/// head from the target network.
class DqnAgent {
 public:
  DqnAgent() = default;
  DqnAgent(int state_dim, std::vector<int> head_sizes, DqnConfig cfg, Rng& init_rng);

  const DqnConfig& config() const { return cfg_; }
  const std::vector<int>& head_sizes() const { return heads_; }
  int num_heads() const { return static_cast<int>(heads_.size()); }

  /// Epsilon-greedy per head; ties pick the lowest index.
  std::vector<int> select(const Eigen::VectorXd& state, double eps, Rng& rng) const;
  std::vector<int> greedy(const Eigen::VectorXd& state) const;

  /// Epsilon at the current decay count; advance() counts one env step.
  double epsilon() const { return cfg_.eps.at(eps_steps_); }
  void advance() { ++eps_steps_; }
  std::int64_t epsilon_steps() const { return eps_steps_; }

  /// Mean squared TD error over heads and batch. When `grad` is given it
  /// receives d(loss)/d(q-net params).
  double td_loss(std::span<const Transition* const> batch, Eigen::VectorXd* grad) const;
  /// One Adam step on the TD loss followed by a soft target update.
  double update(std::span<const Transition* const> batch);
  /// Samples a minibatch from the agent's own buffer; throws std::runtime_error
  /// when fewer than `batch` transitions are stored.
  double update(Rng& rng);

  bool ready() const;

  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  nn::Mlp& q_net() { return q_; }
  const nn::Mlp& q_net() const { return q_; }
  const nn::Mlp& target_net() const { return target_; }
  nn::Mlp& target_net() { return target_; }

  void save(Archive& ar, const std::string& prefix) const;
  void load(const Archive& ar, const std::string& prefix);

 private:
  Eigen::MatrixXd stack_states(std::span<const Transition* const> batch, bool next) const;

  DqnConfig cfg_;
  std::vector<int> heads_;
  std::vector<int> head_offsets_;
  nn::Mlp q_;
  nn::Mlp target_;
  nn::AdamState adam_;
  ReplayBuffer buffer_{1};
  std::int64_t eps_steps_ = 0;
};

}  // namespace mfris::agents
