#include "mfris/chain_mdp.hpp"

#include <algorithm>
#include <cmath>

namespace mfris {

ChainMdp::Outcome ChainMdp::step(int state, int action) {
  const int next = action == 1 ? std::min(state + 1, kGoal) : std::max(state - 1, 0);
  const bool goal = next == kGoal;
  return {next, goal ? 1.0 : 0.0, goal};
}

Eigen::VectorXd ChainMdp::encode(int state) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kStates);
  x[state] = 1.0;
  return x;
}

Eigen::MatrixXd chain_value_iteration(double gamma, double tol) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ChainMdp::kStates, ChainMdp::kActions);
  for (double delta = 1.0; delta > tol;) {
    Eigen::MatrixXd next = q;
    for (int s = 0; s < ChainMdp::kGoal; ++s) {
      for (int a = 0; a < ChainMdp::kActions; ++a) {
        const auto o = ChainMdp::step(s, a);
        next(s, a) = o.reward + (o.terminal ? 0.0 : gamma * q.row(o.next).maxCoeff());
      }
    }
    delta = (next - q).cwiseAbs().maxCoeff();
    q = next;
  }
  return q;
}

ChainTrainResult train_chain_dqn(const agents::DqnConfig& cfg, std::int64_t steps, std::uint64_t seed,
                                 int max_episode_len) {
  Rng init(seed);
  Rng rng(seed + 1);
  agents::DqnAgent agent(ChainMdp::kStates, {ChainMdp::kActions}, cfg, init);
  std::uniform_int_distribution<int> start(0, ChainMdp::kGoal - 1);
  int state = start(rng);
  int len = 0;
  for (std::int64_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd s = ChainMdp::encode(state);
    const auto action = agent.select(s, agent.epsilon(), rng);
    const auto o = ChainMdp::step(state, action[0]);
    agent.buffer().push({s, action, o.reward, ChainMdp::encode(o.next), o.terminal});
    agent.advance();
    if (agent.ready()) agent.update(rng);
    ++len;
    if (o.terminal || len >= max_episode_len) {
      state = start(rng);
      len = 0;
    } else {
      state = o.next;
    }
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ChainMdp::kStates, ChainMdp::kActions);
  for (int s = 0; s < ChainMdp::kGoal; ++s) q.row(s) = agent.q_net().forward(ChainMdp::encode(s)).transpose();
  return {std::move(agent), q, steps};
}

double chain_greedy_return(const agents::DqnAgent& agent, int start, double gamma, int max_len) {
  double ret = 0.0;
  double discount = 1.0;
  int state = start;
  for (int t = 0; t < max_len; ++t) {
    const auto o = ChainMdp::step(state, agent.greedy(ChainMdp::encode(state))[0]);
    ret += discount * o.reward;
    if (o.terminal) break;
    discount *= gamma;
    state = o.next;
  }
  return ret;
}

}  // namespace mfris
