#include "mfris/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mfris::agents {

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                        double lambda) {
  if (rewards.empty()) throw std::invalid_argument("gae: empty trajectory");
  if (values.size() != rewards.size() + 1) throw std::invalid_argument("gae: need T + 1 values");
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double delta = rewards[i] + gamma * values[i + 1] - values[i];
    running = delta + gamma * lambda * running;
    adv[i] = running;
  }
  return adv;
}

std::vector<double> normalize_advantages(std::span<const double> adv) {
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = sd > 1e-12 ? (adv[i] - mean) / sd : adv[i] - mean;
  return out;
}

PpoAgent::PpoAgent(int state_dim, int action_dim, PpoConfig cfg, Rng& init_rng) : cfg_(std::move(cfg)) {
  if (!(cfg_.clip > 0.0 && cfg_.clip < 1.0)) throw std::invalid_argument("PpoAgent: clip ratio must be in (0, 1)");
  std::vector<int> pol{state_dim};
  pol.insert(pol.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  pol.push_back(action_dim);
  std::vector<int> val{state_dim};
  val.insert(val.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  val.push_back(1);
  policy_ = nn::Mlp(pol, init_rng, cfg_.policy_output_scale);
  value_ = nn::Mlp(val, init_rng);
  log_std_ = Eigen::VectorXd::Constant(action_dim, cfg_.init_log_std);
  snapshot_old_policy();
}

void PpoAgent::snapshot_old_policy() {
  old_policy_ = policy_;
  old_log_std_ = log_std_;
}

PpoAgent::Act PpoAgent::act(const Eigen::VectorXd& state, Rng& rng) const {
  const auto s = nn::gaussian_head_sample(policy_.forward(state), log_std_, rng);
  return {s.action, s.log_prob, value(state)};
}

void PpoAgent::record(TrajectoryStep step) { traj_.push_back(std::move(step)); }

namespace {

Eigen::VectorXd batch_log_probs(const Eigen::MatrixXd& means, const Eigen::VectorXd& log_std,
                                const Eigen::MatrixXd& actions) {
  const double half_log_2pi = 0.5 * std::log(kTwoPi);
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  Eigen::VectorXd lp(actions.cols());
  const double norm = -log_std.sum() - half_log_2pi * static_cast<double>(log_std.size());
  for (Eigen::Index i = 0; i < actions.cols(); ++i) {
    const Eigen::ArrayXd z = (actions.col(i) - means.col(i)).array() * inv_std;
    lp[i] = -0.5 * z.square().sum() + norm;
  }
  return lp;
}

}  // namespace

Eigen::VectorXd PpoAgent::old_log_probs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
  return batch_log_probs(old_policy_.forward(states, nullptr), old_log_std_, actions);
}

double PpoAgent::clip_objective(const PolicyBatch& b, Eigen::VectorXd* grad_mean, Eigen::VectorXd* grad_log_std,
                                Eigen::VectorXd* ratios) const {
  const Eigen::Index n = b.states.cols();
  if (n == 0) throw std::invalid_argument("clip_objective: empty batch");
  nn::ForwardCache cache;
  const Eigen::MatrixXd means = policy_.forward(b.states, grad_mean ? &cache : nullptr);
  const Eigen::VectorXd lp = batch_log_probs(means, log_std_, b.actions);
  const Eigen::ArrayXd inv_var = (-2.0 * log_std_.array()).exp();

  const double inv_n = 1.0 / static_cast<double>(n);
  double obj = 0.0;
  Eigen::MatrixXd d_mean = Eigen::MatrixXd::Zero(means.rows(), n);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(log_std_.size());
  if (ratios) ratios->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(lp[i] - b.old_log_probs[i]);
    if (ratios) (*ratios)[i] = ratio;
    const double a = b.advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - cfg_.clip, 1.0 + cfg_.clip);
    const double unclipped_term = ratio * a;
    const double clipped_term = clipped * a;
    obj += std::min(unclipped_term, clipped_term) * inv_n;
    // The gradient flows only through the unclipped branch when it is the min.
    if (unclipped_term <= clipped_term) {
      const double g = a * ratio * inv_n;  // d obj / d log pi_i
      const Eigen::ArrayXd diff = (b.actions.col(i) - means.col(i)).array();
      d_mean.col(i) = g * (diff * inv_var).matrix();
      d_log_std.array() += g * (diff.square() * inv_var - 1.0);
    }
  }
  // Diagonal Gaussian entropy: sum(log_std) + const.
  obj += cfg_.entropy_coef * log_std_.sum();
  d_log_std.array() += cfg_.entropy_coef;
  if (grad_mean) *grad_mean = policy_.backward(cache, d_mean);
  if (grad_log_std) *grad_log_std = d_log_std;
  return obj;
}

double PpoAgent::value_loss(const Eigen::MatrixXd& states, const Eigen::VectorXd& targets,
                            Eigen::VectorXd* grad) const {
  nn::ForwardCache cache;
  const Eigen::MatrixXd v = value_.forward(states, grad ? &cache : nullptr);
  const Eigen::RowVectorXd err = v.row(0) - targets.transpose();
  const double n = static_cast<double>(states.cols());
  if (grad) *grad = value_.backward(cache, (2.0 / n) * err);
  return err.squaredNorm() / n;
}

PpoUpdateStats PpoAgent::update(double bootstrap_value, Rng& rng) {
  const std::size_t t_len = traj_.size();
  if (t_len == 0) throw std::runtime_error("PpoAgent::update: empty trajectory");
  std::vector<double> rewards(t_len), values(t_len + 1);
  for (std::size_t i = 0; i < t_len; ++i) {
    rewards[i] = traj_[i].reward;
    values[i] = traj_[i].value;
  }
  values[t_len] = bootstrap_value;
  const auto adv = gae(rewards, values, cfg_.gamma, cfg_.lambda);
  const auto adv_norm = normalize_advantages(adv);

  const int sdim = state_dim();
  const int adim = action_dim();
  Eigen::MatrixXd states(sdim, static_cast<Eigen::Index>(t_len));
  Eigen::MatrixXd actions(adim, static_cast<Eigen::Index>(t_len));
  Eigen::VectorXd targets(static_cast<Eigen::Index>(t_len));
  for (std::size_t i = 0; i < t_len; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    states.col(c) = traj_[i].state;
    actions.col(c) = traj_[i].action;
    targets[c] = values[i] + adv[i];
  }
  const Eigen::VectorXd old_lp = old_log_probs(states, actions);

  PpoUpdateStats stats;
  std::vector<Eigen::Index> idx(t_len);
  std::iota(idx.begin(), idx.end(), 0);
  const auto mb = static_cast<std::size_t>(std::max(1, cfg_.minibatch));
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < t_len; start += mb) {
      const std::size_t len = std::min(mb, t_len - start);
      PolicyBatch b;
      b.states.resize(sdim, static_cast<Eigen::Index>(len));
      b.actions.resize(adim, static_cast<Eigen::Index>(len));
      b.advantages.resize(static_cast<Eigen::Index>(len));
      b.old_log_probs.resize(static_cast<Eigen::Index>(len));
      Eigen::VectorXd tgt(static_cast<Eigen::Index>(len));
      for (std::size_t i = 0; i < len; ++i) {
        const auto src = idx[start + i];
        const auto dst = static_cast<Eigen::Index>(i);
        b.states.col(dst) = states.col(src);
        b.actions.col(dst) = actions.col(src);
        b.advantages[dst] = adv_norm[static_cast<std::size_t>(src)];
        b.old_log_probs[dst] = old_lp[src];
        tgt[dst] = targets[src];
      }
      Eigen::VectorXd g_mean, g_log_std, g_value, ratios;
      const double obj = clip_objective(b, &g_mean, &g_log_std, &ratios);
      if (stats.minibatches == 0) {
        stats.first_max_ratio_dev = (ratios.array() - 1.0).abs().maxCoeff();
        stats.first_objective = obj;
        stats.first_mean_advantage = b.advantages.mean();
      }
      // Ascent on the objective == descent on its negation.
      nn::adam_step(policy_, -g_mean, cfg_.lr_actor, adam_policy_);
      nn::adam_step(log_std_, -g_log_std, cfg_.lr_actor, adam_log_std_);
      const double vloss = value_loss(b.states, tgt, &g_value);
      nn::adam_step(value_, g_value, cfg_.lr_critic, adam_value_);
      stats.clip_objective += obj;
      stats.value_loss += vloss;
      ++stats.minibatches;
    }
  }
  stats.clip_objective /= stats.minibatches;
  stats.value_loss /= stats.minibatches;
  snapshot_old_policy();
  traj_.clear();
  return stats;
}

void PpoAgent::save(Archive& ar, const std::string& p) const {
  ar.put_ints(p + "policy.sizes", policy_.sizes());
  ar.put_ints(p + "value.sizes", value_.sizes());
  ar.put(p + "policy", policy_.params());
  ar.put(p + "log_std", log_std_);
  ar.put(p + "old_policy", old_policy_.params());
  ar.put(p + "old_log_std", old_log_std_);
  ar.put(p + "value", value_.params());
  const std::pair<const char*, const nn::AdamState*> states[] = {
      {"adam_policy", &adam_policy_}, {"adam_log_std", &adam_log_std_}, {"adam_value", &adam_value_}};
  for (const auto& [name, st] : states) {
    ar.put(p + name + ".m", st->m);
    ar.put(p + name + ".v", st->v);
    ar.put(p + name + ".step", static_cast<std::int64_t>(st->step));
  }
}

void PpoAgent::load(const Archive& ar, const std::string& p) {
  if (ar.ints(p + "policy.sizes") != policy_.sizes() || ar.ints(p + "value.sizes") != value_.sizes()) {
    throw std::runtime_error("PpoAgent::load: incompatible checkpoint schema");
  }
  policy_.set_params(ar.vec(p + "policy"));
  log_std_ = ar.vec(p + "log_std");
  old_policy_.set_params(ar.vec(p + "old_policy"));
  old_log_std_ = ar.vec(p + "old_log_std");
  value_.set_params(ar.vec(p + "value"));
  const std::pair<const char*, nn::AdamState*> states[] = {
      {"adam_policy", &adam_policy_}, {"adam_log_std", &adam_log_std_}, {"adam_value", &adam_value_}};
  for (const auto& [name, st] : states) {
    st->m = ar.vec(p + name + ".m");
    st->v = ar.vec(p + name + ".v");
    st->step = ar.integer(p + name + ".step");
  }
  traj_.clear();
}

}  // namespace mfris::agents
