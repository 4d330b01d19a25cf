#pragma once

#include <cstdint>

#include "mfris/dqn.hpp"

namespace mfris {

/// Five-state corridor. Action 0 moves left (clamped at 0), action 1 moves
/// right; entering state 4 pays 1 and ends the episode. Used to check value
/// learning against exact dynamic programming.
struct ChainMdp {
  static constexpr int kStates = 5;
  static constexpr int kGoal = kStates - 1;
  static constexpr int kActions = 2;

  struct Outcome {
    int next = 0;
    double reward = 0.0;
    bool terminal = false;
  };
  static Outcome step(int state, int action);
  static Eigen::VectorXd encode(int state);
};

/// Optimal action values by value iteration; rows are states (the goal row
/// stays zero), columns actions.
Eigen::MatrixXd chain_value_iteration(double gamma, double tol = 1e-14);

struct ChainTrainResult {
  agents::DqnAgent agent;
  Eigen::MatrixXd q;  ///< learned values, same layout as chain_value_iteration
  std::int64_t steps = 0;
};

/// Trains a single-head DQN on the chain with a uniformly random behaviour
/// policy and random start states.
ChainTrainResult train_chain_dqn(const agents::DqnConfig& cfg, std::int64_t steps, std::uint64_t seed,
                                 int max_episode_len = 20);

/// Greedy discounted return from `start`, capped at `max_len` steps.
double chain_greedy_return(const agents::DqnAgent& agent, int start, double gamma, int max_len = 20);

}  // namespace mfris
