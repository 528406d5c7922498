#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "bpo/core/rng.hpp"

namespace bpo::net {

// Closed-form helpers for the two policy families: categorical over logits and
// diagonal Gaussian with a state-independent log standard deviation.

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

inline double log_softmax_at(const Eigen::VectorXd& logits, int index) {
  const double m = logits.maxCoeff();
  return logits[index] - m - std::log((logits.array() - m).exp().sum());
}

inline double categorical_log_prob(const Eigen::VectorXd& probs, int index) { return std::log(probs[index]); }

/// KL(p || q) for probability vectors; terms with p_i = 0 contribute 0.
inline double categorical_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  return kl;
}

inline double categorical_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

inline int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

inline double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, const Eigen::VectorXd& x) {
  const Eigen::ArrayXd z = (x - mean).array() / log_std.array().exp();
  return -0.5 * z.square().sum() - log_std.sum() - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

/// KL(N(m0, e^{2 ls0}) || N(m1, e^{2 ls1})), diagonal.
inline double gaussian_kl(const Eigen::VectorXd& m0, const Eigen::VectorXd& ls0, const Eigen::VectorXd& m1,
                          const Eigen::VectorXd& ls1) {
  const Eigen::ArrayXd var0 = (2.0 * ls0.array()).exp();
  const Eigen::ArrayXd var1 = (2.0 * ls1.array()).exp();
  return (ls1.array() - ls0.array() + (var0 + (m0 - m1).array().square()) / (2.0 * var1) - 0.5).sum();
}

inline double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return (log_std.array() + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e)).sum();
}

inline Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) x[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
  return x;
}

}  // namespace bpo::net
