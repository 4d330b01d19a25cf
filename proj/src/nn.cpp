#include "mfris/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace mfris::nn {

Mlp::Mlp(std::vector<int> sizes, Rng& rng, double output_scale) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
  for (int l = 0; l < num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
    const double scale = (l + 1 == num_layers()) ? output_scale : 1.0;
    std::uniform_real_distribution<double> uni(-limit, limit);
    auto w = weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = scale * uni(rng);
    }
  }
}

void Mlp::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size()) throw std::invalid_argument("Mlp::set_params: size mismatch");
  params_ = p;
  ++version_;
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int l) const {
  return {params_.data() + offsets_.at(l), sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int l) const {
  return {params_.data() + offsets_.at(l) + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weight(int l) {
  return {params_.data() + offsets_.at(l), sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(int l) {
  return {params_.data() + offsets_.at(l) + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  Eigen::VectorXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::VectorXd z = bias(l);
    z.noalias() += weight(l) * a;
    if (l + 1 < num_layers()) z = z.array().tanh();
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, ForwardCache* cache) const {
  if (x.rows() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(num_layers() + 1);
    cache->activations.push_back(x);
    cache->owner = this;
    cache->version = version_;
  }
  Eigen::MatrixXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z(sizes_[l + 1], a.cols());
    z.noalias() = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) z = z.array().tanh();
    if (cache) cache->activations.push_back(z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                              Eigen::MatrixXd* input_grad) const {
  if (cache.owner != this || cache.version != version_ ||
      static_cast<int>(cache.activations.size()) != num_layers() + 1) {
    throw std::logic_error("Mlp::backward: stale forward cache");
  }
  if (upstream.rows() != output_size() || upstream.cols() != cache.activations.front().cols()) {
    throw std::invalid_argument("Mlp::backward: upstream shape mismatch");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& in = cache.activations[l];
    const Eigen::Index rows = sizes_[l + 1];
    const Eigen::Index cols = sizes_[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gw.noalias() = delta * in.transpose();
    gb = delta.rowwise().sum();
    if (l > 0 || input_grad) {
      Eigen::MatrixXd back(cols, delta.cols());
      back.noalias() = weight(l).transpose() * delta;
      if (l > 0) {
        delta = back.array() * (1.0 - in.array().square());
      } else {
        *input_grad = std::move(back);
      }
    }
  }
  return grad;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr, AdamState& st) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (st.m.size() != params.size()) {
    st.m = Eigen::VectorXd::Zero(params.size());
    st.v = Eigen::VectorXd::Zero(params.size());
    st.step = 0;
  }
  ++st.step;
  st.m = kAdamBeta1 * st.m + (1.0 - kAdamBeta1) * grad;
  st.v = kAdamBeta2 * st.v + (1.0 - kAdamBeta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(st.step));
  params.array() -= lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + kAdamEps);
}

void adam_step(Mlp& net, const Eigen::VectorXd& grad, double lr, AdamState& state) {
  adam_step(net.mutable_params(), grad, lr, state);
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (target.num_params() != source.num_params()) throw std::invalid_argument("soft_update: shape mismatch");
  auto& p = target.mutable_params();
  p = tau * source.params() + (1.0 - tau) * p;
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action) {
  const double half_log_2pi = 0.5 * std::log(kTwoPi);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - half_log_2pi;
  }
  return lp;
}

GaussianSample gaussian_head_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng) {
  if (mean.size() != log_std.size()) throw std::invalid_argument("gaussian_head_sample: size mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  GaussianSample s;
  s.action.resize(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) s.action[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
  s.log_prob = gaussian_log_prob(mean, log_std, s.action);
  return s;
}

Eigen::VectorXd softmax_groups(const Eigen::VectorXd& logits, std::span<const int> groups) {
  Eigen::VectorXd out(logits.size());
  Eigen::Index off = 0;
  for (int g : groups) {
    const auto seg = logits.segment(off, g);
    const Eigen::ArrayXd e = (seg.array() - seg.maxCoeff()).exp();
    out.segment(off, g) = e / e.sum();
    off += g;
  }
  if (off != logits.size()) throw std::invalid_argument("softmax_groups: group sizes do not cover logits");
  return out;
}

Eigen::VectorXd softmax_groups_backward(const Eigen::VectorXd& probs, const Eigen::VectorXd& upstream,
                                        std::span<const int> groups) {
  Eigen::VectorXd out(probs.size());
  Eigen::Index off = 0;
  for (int g : groups) {
    const auto p = probs.segment(off, g);
    const auto u = upstream.segment(off, g);
    const double dot = p.dot(u);
    out.segment(off, g) = p.array() * (u.array() - dot);
    off += g;
  }
  return out;
}

}  // namespace mfris::nn
