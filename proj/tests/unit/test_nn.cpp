#include <doctest.h>

#include <cmath>

#include "mfris/nn.hpp"

using namespace mfris;
using namespace mfris::nn;

namespace {

// Max relative error between analytic and central-difference gradients of
// loss(params) = sum(upstream .* forward(x)).
double fd_check(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) {
  ForwardCache cache;
  net.forward(x, &cache);
  const Eigen::VectorXd analytic = net.backward(cache, upstream);
  const double h = 1e-5;
  double worst = 0.0;
  Eigen::VectorXd p = net.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    net.set_params(p);
    const double up = (upstream.array() * net.forward(x, nullptr).array()).sum();
    p[i] = keep - h;
    net.set_params(p);
    const double down = (upstream.array() * net.forward(x, nullptr).array()).sum();
    p[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({1e-6, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  net.set_params(p);
  return worst;
}

}  // namespace

TEST_CASE("zero weights output the last bias") {
  Rng rng(1);
  Mlp net({3, 4, 2}, rng);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(net.num_params());
  net.set_params(p);
  net.bias(1) << 0.5, -1.5;
  const Eigen::VectorXd y = net.forward(Eigen::Vector3d(1, 2, 3));
  CHECK(y[0] == 0.5);
  CHECK(y[1] == -1.5);
}

TEST_CASE("a single identity layer passes its input through") {
  Rng rng(1);
  Mlp net({3, 3}, rng);
  net.set_params(Eigen::VectorXd::Zero(net.num_params()));
  net.weight(0) = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::Vector3d x(0.3, -2.0, 7.0);
  CHECK((net.forward(Eigen::VectorXd(x)) - x).norm() == 0.0);
}

TEST_CASE("hand-set 2-2-1 network") {
  Rng rng(1);
  Mlp net({2, 2, 1}, rng);
  net.weight(0) << 0.5, -1.0, 0.25, 2.0;
  net.bias(0) << 0.1, -0.2;
  net.weight(1) << 1.5, -0.5;
  net.bias(1) << 0.3;
  const double x0 = 0.4, x1 = -0.7;
  const double h0 = std::tanh(0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = std::tanh(0.25 * x0 + 2.0 * x1 - 0.2);
  CHECK(net.forward(Eigen::Vector2d(x0, x1))[0] == doctest::Approx(1.5 * h0 - 0.5 * h1 + 0.3).epsilon(1e-15));
}

TEST_CASE("input size mismatch is rejected") {
  Rng rng(1);
  Mlp net({3, 2}, rng);
  CHECK_THROWS(net.forward(Eigen::VectorXd::Zero(2)));
  CHECK_THROWS(Mlp({3}, rng));
}

TEST_CASE("linear layer gradient is the outer product of upstream and input") {
  Rng rng(2);
  Mlp net({3, 2}, rng);
  Eigen::MatrixXd x(3, 1);
  x << 1.0, -2.0, 0.5;
  Eigen::MatrixXd up(2, 1);
  up << 0.3, -1.1;
  ForwardCache cache;
  net.forward(x, &cache);
  Eigen::MatrixXd in_grad;
  const Eigen::VectorXd g = net.backward(cache, up, &in_grad);
  const Eigen::Map<const Eigen::MatrixXd> gw(g.data(), 2, 3);
  CHECK((gw - up * x.transpose()).norm() < 1e-15);
  CHECK((g.tail(2) - up).norm() < 1e-15);
  CHECK((in_grad - net.weight(0).transpose() * up).norm() < 1e-15);
}

TEST_CASE("backward matches central finite differences on random nets") {
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp net({4, 6, 5, 3}, rng);
    Eigen::MatrixXd x(4, 3), up(3, 3);
    for (auto& v : x.reshaped()) v = g(rng);
    for (auto& v : up.reshaped()) v = g(rng);
    CHECK(fd_check(net, x, up) < 1e-4);
  }
}

TEST_CASE("zero upstream gives a zero gradient") {
  Rng rng(4);
  Mlp net({3, 5, 2}, rng);
  ForwardCache cache;
  net.forward(Eigen::MatrixXd::Random(3, 4), &cache);
  CHECK(net.backward(cache, Eigen::MatrixXd::Zero(2, 4)).norm() == 0.0);
}

TEST_CASE("stale or foreign caches are rejected") {
  Rng rng(5);
  Mlp net({3, 5, 2}, rng);
  Mlp other({3, 5, 2}, rng);
  ForwardCache cache;
  net.forward(Eigen::MatrixXd::Random(3, 2), &cache);
  CHECK_THROWS_AS(other.backward(cache, Eigen::MatrixXd::Zero(2, 2)), std::logic_error);
  net.mutable_params()[0] += 1.0;
  CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Zero(2, 2)), std::logic_error);
}

TEST_CASE("forward is a deterministic function of parameters and input") {
  Rng a(9), b(9);
  Mlp n1({4, 8, 2}, a), n2({4, 8, 2}, b);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, -1, 1);
  CHECK(n1.forward(x) == n2.forward(x));
}

TEST_CASE("adam optimizer steps") {
  AdamState st;
  Eigen::VectorXd p(3);
  p << 1.0, -2.0, 0.5;
  const Eigen::VectorXd keep = p;
  adam_step(p, Eigen::VectorXd::Zero(3), 1e-2, st);
  CHECK(p == keep);

  AdamState st2;
  Eigen::VectorXd g(3);
  g << 4.0, -0.001, 2.5;
  adam_step(p, g, 1e-2, st2);
  for (int i = 0; i < 3; ++i) {
    const double sign = g[i] > 0 ? 1.0 : -1.0;
    CHECK(p[i] - keep[i] == doctest::Approx(-1e-2 * sign).epsilon(1e-4));
  }

  AdamState s3, s4;
  Eigen::VectorXd a = keep, b = keep;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd gi = Eigen::VectorXd::Constant(3, std::sin(i));
    adam_step(a, gi, 1e-3, s3);
    adam_step(b, gi, 1e-3, s4);
  }
  CHECK(a == b);
}

TEST_CASE("soft update contracts the parameter gap by (1 - tau)") {
  Rng rng(6);
  Mlp src({3, 4, 2}, rng), dst({3, 4, 2}, rng);
  double gap = (dst.params() - src.params()).norm();
  for (int i = 0; i < 5; ++i) {
    soft_update(dst, src, 0.1);
    const double next = (dst.params() - src.params()).norm();
    CHECK(next == doctest::Approx(0.9 * gap).epsilon(1e-12));
    gap = next;
  }
}

TEST_CASE("gaussian head") {
  const int d = 4;
  const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(d, -1, 1);
  CHECK(gaussian_log_prob(mean, Eigen::VectorXd::Zero(d), mean) ==
        doctest::Approx(-0.5 * d * std::log(2 * kPi)).epsilon(1e-14));

  Rng rng(7);
  const auto tight = gaussian_head_sample(mean, Eigen::VectorXd::Constant(d, -60.0), rng);
  CHECK((tight.action - mean).norm() < 1e-20);

  const Eigen::VectorXd log_std = Eigen::VectorXd::Constant(d, -0.5);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = gaussian_head_sample(mean, log_std, rng);
    CHECK(s.log_prob == doctest::Approx(gaussian_log_prob(mean, log_std, s.action)).epsilon(1e-12));
    const Eigen::VectorXd z = s.action - mean;
    sum += z;
    sq += z.cwiseAbs2();
  }
  for (int i = 0; i < d; ++i) {
    const double var = sq[i] / n - std::pow(sum[i] / n, 2);
    CHECK(var == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
  }
}

TEST_CASE("group softmax sums to one per group and its backward matches finite differences") {
  const std::vector<int> groups{2, 3};
  Eigen::VectorXd logits(5);
  logits << std::log(3.0), 0.0, 1.0, -2.0, 0.5;
  const Eigen::VectorXd p = softmax_groups(logits, groups);
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));
  CHECK(std::abs(p.head(2).sum() - 1.0) < 1e-12);
  CHECK(std::abs(p.tail(3).sum() - 1.0) < 1e-12);

  const Eigen::VectorXd big = Eigen::VectorXd::Constant(5, 1e6);
  CHECK(softmax_groups(big, groups).allFinite());

  Eigen::VectorXd up(5);
  up << 0.3, -0.2, 1.0, 0.7, -1.5;
  const Eigen::VectorXd g = softmax_groups_backward(p, up, groups);
  const double h = 1e-6;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd a = logits, b = logits;
    a[i] += h;
    b[i] -= h;
    const double numeric = (up.dot(softmax_groups(a, groups)) - up.dot(softmax_groups(b, groups))) / (2 * h);
    CHECK(g[i] == doctest::Approx(numeric).epsilon(1e-6));
  }
}
