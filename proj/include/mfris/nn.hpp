#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfris/types.hpp"

namespace mfris::nn {

class Mlp;

/// Activations recorded by a batched forward pass; column = sample.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  const Mlp* owner = nullptr;
  std::uint64_t version = 0;
};

/// Fully connected net with tanh hidden layers and a linear output layer.
///
/// Parameters live in one flat vector (per layer: W column-major, then b) so
/// that gradients, optimizer moments and soft updates are plain vector ops.
class Mlp {
 public:
  Mlp() = default;
  /// `sizes` = {input, hidden..., output}. Glorot-uniform weights, zero
  /// biases; the output layer weights are multiplied by `output_scale`.
  Mlp(std::vector<int> sizes, Rng& rng, double output_scale = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_params() const { return params_.size(); }

  const Eigen::VectorXd& params() const { return params_; }
  /// Mutable access invalidates outstanding forward caches.
  Eigen::VectorXd& mutable_params() {
    ++version_;
    return params_;
  }
  void set_params(const Eigen::VectorXd& p);
  std::uint64_t version() const { return version_; }

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<Eigen::VectorXd> bias(int layer);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  /// Batched forward; x is input_size x batch. Fills `cache` when given.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache* cache) const;

  /// Gradient of sum_i <upstream_i, out_i> with respect to every parameter.
  /// Throws std::logic_error if the cache came from another net or from
  /// before a parameter change.
  Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* input_grad = nullptr) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
  std::uint64_t version_ = 0;
};

/// Adaptive-moment optimizer state for one parameter vector.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam descent step on `params`.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr, AdamState& state);
void adam_step(Mlp& net, const Eigen::VectorXd& grad, double lr, AdamState& state);

/// target <- tau * source + (1 - tau) * target.
void soft_update(Mlp& target, const Mlp& source, double tau);

struct GaussianSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

/// Diagonal Gaussian log-density.
double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action);
GaussianSample gaussian_head_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng);

/// Softmax applied independently to consecutive groups of the given sizes.
Eigen::VectorXd softmax_groups(const Eigen::VectorXd& logits, std::span<const int> groups);
/// Vector-Jacobian product of softmax_groups given its output `probs`.
Eigen::VectorXd softmax_groups_backward(const Eigen::VectorXd& probs, const Eigen::VectorXd& upstream,
                                        std::span<const int> groups);

}  // namespace mfris::nn
