#include "mfris/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfris::agents {

double EpsilonSchedule::at(std::int64_t t) const {
  if (std::isinf(decay_steps)) return eps_max;
  const double eps = eps_max - static_cast<double>(t) * (eps_max - eps_min) / decay_steps;
  return std::max(eps_min, eps);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (data_.empty()) throw std::runtime_error("ReplayBuffer: empty");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  std::vector<const Transition*> out;
  out.reserve(n);
  for (auto i : sample_indices(n, rng)) out.push_back(&data_[i]);
  return out;
}

void ReplayBuffer::clear() {
  data_.clear();
  head_ = 0;
}

DqnAgent::DqnAgent(int state_dim, std::vector<int> head_sizes, DqnConfig cfg, Rng& init_rng)
    : cfg_(std::move(cfg)), heads_(std::move(head_sizes)), buffer_(cfg_.capacity) {
  if (heads_.empty()) throw std::invalid_argument("DqnAgent: need at least one head");
  int total = 0;
  for (int h : heads_) {
    if (h < 1) throw std::invalid_argument("DqnAgent: head size must be >= 1");
    head_offsets_.push_back(total);
    total += h;
  }
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  sizes.push_back(total);
  q_ = nn::Mlp(sizes, init_rng);
  target_ = q_;
}

std::vector<int> DqnAgent::greedy(const Eigen::VectorXd& state) const {
  const Eigen::VectorXd q = q_.forward(state);
  std::vector<int> a(heads_.size());
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    int best = 0;
    for (int i = 1; i < heads_[h]; ++i) {
      if (q[head_offsets_[h] + i] > q[head_offsets_[h] + best]) best = i;
    }
    a[h] = best;
  }
  return a;
}

std::vector<int> DqnAgent::select(const Eigen::VectorXd& state, double eps, Rng& rng) const {
  std::vector<int> a = greedy(state);
  if (eps <= 0.0) return a;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    if (coin(rng) < eps) a[h] = std::uniform_int_distribution<int>(0, heads_[h] - 1)(rng);
  }
  return a;
}

Eigen::MatrixXd DqnAgent::stack_states(std::span<const Transition* const> batch, bool next) const {
  Eigen::MatrixXd x(q_.input_size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = next ? batch[i]->next_state : batch[i]->state;
  }
  return x;
}

double DqnAgent::td_loss(std::span<const Transition* const> batch, Eigen::VectorXd* grad) const {
  if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd q_next = target_.forward(stack_states(batch, true), nullptr);
  nn::ForwardCache cache;
  const Eigen::MatrixXd q = q_.forward(stack_states(batch, false), grad ? &cache : nullptr);

  const double norm = 1.0 / (static_cast<double>(b) * num_heads());
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Transition& t = *batch[static_cast<std::size_t>(i)];
    if (static_cast<int>(t.action.size()) != num_heads()) throw std::invalid_argument("td_loss: action arity");
    for (int h = 0; h < num_heads(); ++h) {
      const int off = head_offsets_[h];
      const double best_next = q_next.col(i).segment(off, heads_[h]).maxCoeff();
      const double y = t.reward + (t.terminal ? 0.0 : cfg_.gamma * best_next);
      const Eigen::Index row = off + t.action[h];
      const double err = y - q(row, i);
      loss += err * err;
      upstream(row, i) = -2.0 * err * norm;
    }
  }
  if (grad) *grad = q_.backward(cache, upstream);
  return loss * norm;
}

double DqnAgent::update(std::span<const Transition* const> batch) {
  Eigen::VectorXd grad;
  const double loss = td_loss(batch, &grad);
  nn::adam_step(q_, grad, cfg_.lr, adam_);
  nn::soft_update(target_, q_, cfg_.tau);
  return loss;
}

bool DqnAgent::ready() const {
  return buffer_.size() >= static_cast<std::size_t>(std::max(cfg_.batch, cfg_.warmup));
}

double DqnAgent::update(Rng& rng) {
  if (buffer_.size() < static_cast<std::size_t>(cfg_.batch)) {
    throw std::runtime_error("DqnAgent::update: not enough samples in replay buffer");
  }
  const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch), rng);
  return update(batch);
}

void DqnAgent::save(Archive& ar, const std::string& p) const {
  ar.put_ints(p + "heads", heads_);
  ar.put_ints(p + "sizes", q_.sizes());
  ar.put(p + "q", q_.params());
  ar.put(p + "target", target_.params());
  ar.put(p + "adam.m", adam_.m);
  ar.put(p + "adam.v", adam_.v);
  ar.put(p + "adam.step", static_cast<std::int64_t>(adam_.step));
  ar.put(p + "eps_steps", eps_steps_);
}

void DqnAgent::load(const Archive& ar, const std::string& p) {
  if (ar.ints(p + "heads") != heads_ || ar.ints(p + "sizes") != q_.sizes()) {
    throw std::runtime_error("DqnAgent::load: incompatible checkpoint schema");
  }
  q_.set_params(ar.vec(p + "q"));
  target_.set_params(ar.vec(p + "target"));
  adam_.m = ar.vec(p + "adam.m");
  adam_.v = ar.vec(p + "adam.v");
  adam_.step = ar.integer(p + "adam.step");
  eps_steps_ = ar.integer(p + "eps_steps");
}

}  // namespace mfris::agents
