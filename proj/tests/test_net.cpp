#include <gtest/gtest.h>

#include <cmath>

#include "bpo/net/distributions.hpp"
#include "bpo/net/dual_encoder.hpp"
#include "bpo/net/mlp.hpp"
#include "bpo/net/policy.hpp"
#include "bpo/train/agent.hpp"

namespace bpo {
namespace {

using net::Matrix;
using net::Vector;

TEST(Policy, ZeroWeightsGiveUniformCategorical) {
  const net::Policy policy({3, 2, 8}, DiscreteActions{4});
  const Vector theta = Vector::Zero(policy.num_params());
  const auto d = policy.distribution(theta, Eigen::Vector3d(1, -2, 3), Eigen::Vector2d(0.3, 0.7));
  for (double p : d.probs) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Softmax, NormalizesRandomInputs) {
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd logits(5);
    for (auto& x : logits) x = n(rng);
    const Eigen::VectorXd p = net::softmax(logits);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_TRUE((p.array() >= 0.0).all());
  }
}

TEST(Mlp, LinearLayerWeightGradientIsInput) {
  const net::Mlp mlp(3, {1}, net::Activation::kLinear, net::Activation::kLinear, 0);
  Vector theta = Vector::Zero(mlp.num_params());
  const Matrix x = Eigen::Vector3d(0.5, -1.5, 2.0);
  net::Mlp::Cache cache;
  mlp.forward(theta, x, cache);
  Vector grad = Vector::Zero(theta.size());
  mlp.backward(theta, cache, Matrix::Ones(1, 1), grad, false);
  const auto& layer = mlp.layers().front();
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(layer.weights(grad)(0, i), x(i, 0));
  EXPECT_DOUBLE_EQ(layer.bias(grad)[0], 1.0);
}

net::DualEncoderNet tiny_net() { return net::DualEncoderNet({3, 4, 6, 2}); }

Vector random_theta(const net::DualEncoderNet& net, std::uint64_t seed) {
  Rng rng(seed);
  Vector theta = Vector::Zero(net.num_params());
  net.init(theta, rng);
  std::normal_distribution<double> n;
  for (auto& x : theta) x += 0.2 * n(rng);
  return theta;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(DualEncoder, ZeroUpstreamGivesZeroGradient) {
  const auto net = tiny_net();
  const Vector theta = random_theta(net, 1);
  Rng rng(2);
  const Matrix s = random_matrix(3, 5, rng), b = random_matrix(4, 5, rng);
  net::DualEncoderNet::Cache cache;
  net.forward(theta, s, b, cache);
  Vector grad = Vector::Zero(theta.size());
  net.backward(theta, cache, Matrix::Zero(2, 5), grad);
  EXPECT_EQ(grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(DualEncoder, GradientIsLinearOverSamples) {
  const auto net = tiny_net();
  const Vector theta = random_theta(net, 3);
  Rng rng(4);
  const Matrix s = random_matrix(3, 2, rng), b = random_matrix(4, 2, rng), u = random_matrix(2, 2, rng);
  const auto grad_of = [&](const Matrix& ss, const Matrix& bb, const Matrix& uu) {
    net::DualEncoderNet::Cache cache;
    net.forward(theta, ss, bb, cache);
    Vector g = Vector::Zero(theta.size());
    net.backward(theta, cache, uu, g);
    return g;
  };
  const Vector both = grad_of(s, b, u);
  const Vector sum = grad_of(s.col(0), b.col(0), u.col(0)) + grad_of(s.col(1), b.col(1), u.col(1));
  EXPECT_LE((both - sum).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DualEncoder, JvpMatchesDirectionalDerivative) {
  const auto net = tiny_net();
  const Vector theta = random_theta(net, 5);
  Rng rng(6);
  const Matrix s = random_matrix(3, 4, rng), b = random_matrix(4, 4, rng);
  const Vector v = random_matrix(theta.size(), 1, rng);
  net::DualEncoderNet::Cache cache;
  net.forward(theta, s, b, cache);
  const Matrix jv = net.jvp(theta, v, cache);
  const double h = 1e-6;
  const Matrix fd = (net.forward(theta + h * v, s, b) - net.forward(theta - h * v, s, b)) / (2.0 * h);
  EXPECT_LE((jv - fd).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(DualEncoder, RawRoutingConcatenatesInputs) {
  net::NetworkConfig cfg{3, 4, 6, 2, net::InputRouting::kRaw};
  const net::DualEncoderNet raw(cfg);
  EXPECT_FALSE(raw.state_encoder().has_value());
  EXPECT_FALSE(raw.belief_encoder().has_value());
  EXPECT_EQ(raw.head().input_dim(), 7);
  const net::DualEncoderNet enc(net::NetworkConfig{3, 4, 6, 2});
  EXPECT_EQ(enc.head().input_dim(), 12);
}

TEST(DualEncoder, WidthMismatchRejected) {
  const auto net = tiny_net();
  const Vector theta = Vector::Zero(net.num_params());
  EXPECT_THROW(net.forward(theta, Matrix::Zero(2, 1), Matrix::Zero(4, 1)), ConfigError);
  EXPECT_THROW(net::DualEncoderNet(net::NetworkConfig{0, 0, 4, 1}), ConfigError);
}

TEST(DualEncoder, ActivationsStayBoundedAndFinite) {
  const auto net = tiny_net();
  Vector theta = random_theta(net, 7) * 50.0;
  const Matrix s = Matrix::Constant(3, 2, 1e6), b = Matrix::Constant(4, 2, -1e6);
  net::DualEncoderNet::Cache cache;
  const Matrix out = net.forward(theta, s, b, cache);
  EXPECT_TRUE(out.allFinite());
  for (const Matrix& a : cache.head.acts) EXPECT_TRUE(a.allFinite());
  const Matrix t = net::tanh_fast(Eigen::Vector4d(-1e4, -3.0, 3.0, 1e4));
  EXPECT_TRUE(t.allFinite());
  EXPECT_TRUE((t.array().abs() <= 1.0).all());
  EXPECT_NEAR(t(1, 0), std::tanh(-3.0), 1e-15);
}

TEST(Init, OrthogonalWithGain) {
  Rng rng(8);
  const Matrix w = net::orthogonal_matrix(6, 6, 2.0, rng);
  EXPECT_LE((w * w.transpose() - 4.0 * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix wide = net::orthogonal_matrix(3, 8, 1.0, rng);
  EXPECT_LE((wide * wide.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Init, PolicyStartsNearUniform) {
  const Agent agent(TrainConfig::defaults(EnvId::kTiger));
  Rng rng(9);
  const Vector theta = agent.policy().init_params(rng);
  const auto d = agent.policy().distribution(theta, tiger_state(TigerObservation::kHearLeft), Eigen::Vector2d(0.85, 0.15));
  for (double p : d.probs) EXPECT_NEAR(p, 1.0 / 3.0, 0.02);
  const Agent ld(TrainConfig::defaults(EnvId::kLightDark));
  const Vector th = ld.policy().init_params(rng);
  EXPECT_EQ(ld.policy().log_std(th), Eigen::Vector2d::Zero());
}

TEST(Distributions, KlKnownValues) {
  const Eigen::Vector2d p(0.85, 0.15), u(0.5, 0.5);
  EXPECT_EQ(net::categorical_kl(p, p), 0.0);
  const double expected = 0.85 * std::log(0.85 / 0.5) + 0.15 * std::log(0.15 / 0.5);
  EXPECT_NEAR(net::categorical_kl(p, u), expected, 1e-15);
  EXPECT_NEAR(net::categorical_kl(p, u), 0.270438, 1e-6);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1), zero = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(net::gaussian_kl(one, zero, zero, zero), 0.5, 1e-15);
  EXPECT_EQ(net::gaussian_kl(one, zero, one, zero), 0.0);
}

TEST(Distributions, KlNonNegative) {
  Rng rng(10);
  std::normal_distribution<double> n;
  for (int k = 0; k < 500; ++k) {
    Eigen::VectorXd a(4), b(4), m0(3), m1(3), l0(3), l1(3);
    for (auto* v : {&a, &b, &m0, &m1, &l0, &l1})
      for (auto& x : *v) x = n(rng);
    EXPECT_GE(net::categorical_kl(net::softmax(a), net::softmax(b)), 0.0);
    EXPECT_GE(net::gaussian_kl(m0, l0, m1, l1), -1e-15);
    EXPECT_NEAR(net::gaussian_kl(m0, l0, m0, l0), 0.0, 1e-12);
  }
}

TEST(Distributions, GaussianLogProbAndSampling) {
  const Eigen::Vector2d mean(1.0, -1.0), log_std(0.0, std::log(2.0));
  const double lp = net::gaussian_log_prob(mean, log_std, Eigen::Vector2d(2.0, -1.0));
  EXPECT_NEAR(lp, -0.5 - std::log(2.0) - std::log(2.0 * std::numbers::pi), 1e-12);
  Rng rng(11);
  const int n = 50000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = net::sample_gaussian(mean, log_std, rng);
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const Eigen::Vector2d m = sum / n;
  EXPECT_NEAR(m[0], 1.0, 0.02);
  EXPECT_NEAR(sq[1] / n - m[1] * m[1], 4.0, 0.1);
}

TEST(Distributions, CategoricalSamplingFrequencies) {
  Rng rng(12);
  const Eigen::Vector3d p(0.2, 0.5, 0.3);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[net::sample_categorical(p, rng)] += 1.0;
  EXPECT_LE((counts / n - p).cwiseAbs().maxCoeff(), 0.01);
}

}  // namespace
}  // namespace bpo
