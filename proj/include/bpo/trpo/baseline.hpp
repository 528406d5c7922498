#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bpo/net/dual_encoder.hpp"

namespace bpo::trpo {

using net::Index;
using net::Matrix;
using net::Vector;

struct BaselineOptions {
  int epochs = 5;
  double learning_rate = 1e-3;
  Index minibatch = 64;
};

struct BaselineFit {
  double mse_before = 0.0;
  double mse_after = 0.0;
  bool reverted = false;
};

/// Adam moment estimates over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  explicit Adam(Index n) : m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

  void step(Vector& theta, const Vector& grad, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

 private:
  Vector m_;
  Vector v_;
  long t_ = 0;
};

/// State-belief value function V(s, b) = shift + scale * net(s, b). The
/// output statistics follow the regression targets; when they change, the
/// final layer is rescaled so that predictions are preserved.
class ValueFunction {
 public:
  ValueFunction() = default;

  ValueFunction(const net::NetworkConfig& cfg, Rng& rng) {
    net::NetworkConfig c = cfg;
    c.output_dim = 1;
    net_ = net::DualEncoderNet(c);
    theta_ = Vector::Zero(net_.num_params());
    net_.init(theta_, rng);
    adam_ = Adam(net_.num_params());
  }

  const net::DualEncoderNet& network() const { return net_; }
  const Vector& params() const { return theta_; }
  Vector& params() { return theta_; }
  double shift() const { return shift_; }
  double scale() const { return scale_; }
  void set_output_stats(double shift, double scale) {
    shift_ = shift;
    scale_ = scale;
  }

  Vector predict(const Matrix& states, const Matrix& beliefs) const {
    return (shift_ + scale_ * net_.forward(theta_, states, beliefs).row(0).array()).matrix().transpose();
  }

  double mse(const Matrix& states, const Matrix& beliefs, const Vector& targets) const {
    return (predict(states, beliefs) - targets).squaredNorm() / static_cast<double>(targets.size());
  }

  /// Minibatch Adam regression onto `targets`. Keeps the previous parameters
  /// if the fit ends with a larger training error than it started with.
  BaselineFit fit(const Matrix& states, const Matrix& beliefs, const Vector& targets, const BaselineOptions& opt,
                  Rng& rng) {
    BaselineFit result;
    result.mse_before = mse(states, beliefs, targets);
    result.mse_after = result.mse_before;
    if (opt.epochs <= 0 || opt.learning_rate == 0.0 || targets.size() == 0) return result;

    const Vector theta_before = theta_;
    const double shift_before = shift_, scale_before = scale_;
    renormalize(targets);

    const Index n = targets.size();
    const Index mb = std::max<Index>(1, std::min(opt.minibatch, n));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector normalized = (targets.array() - shift_) / scale_;
    const bool has_state = states.rows() > 0, has_belief = beliefs.rows() > 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (Index start = 0; start < n; start += mb) {
        const Index len = std::min(mb, n - start);
        Matrix s(states.rows(), len), b(beliefs.rows(), len);
        Vector y(len);
        for (Index j = 0; j < len; ++j) {
          const Index i = order[static_cast<std::size_t>(start + j)];
          if (has_state) s.col(j) = states.col(i);
          if (has_belief) b.col(j) = beliefs.col(i);
          y[j] = normalized[i];
        }
        net::DualEncoderNet::Cache cache;
        const Matrix out = net_.forward(theta_, s, b, cache);
        const Matrix d_out = (2.0 / static_cast<double>(len)) * (out.row(0).transpose() - y).transpose();
        Vector grad = Vector::Zero(theta_.size());
        net_.backward(theta_, cache, d_out, grad);
        adam_.step(theta_, grad, opt.learning_rate);
      }
    }
    result.mse_after = mse(states, beliefs, targets);
    if (!(result.mse_after <= result.mse_before)) {
      theta_ = theta_before;
      shift_ = shift_before;
      scale_ = scale_before;
      result.mse_after = result.mse_before;
      result.reverted = true;
    }
    return result;
  }

 private:
  void renormalize(const Vector& targets) {
    const double mean = targets.mean();
    const double sd = std::sqrt((targets.array() - mean).square().mean());
    const double new_scale = std::max(sd, 1.0);
    const net::DenseLayer& last = net_.head().layers().back();
    last.weights(theta_) *= scale_ / new_scale;
    last.bias(theta_) = ((scale_ * last.bias(theta_).array() + shift_ - mean) / new_scale).matrix();
    shift_ = mean;
    scale_ = new_scale;
  }

  net::DualEncoderNet net_;
  Vector theta_;
  double shift_ = 0.0;
  double scale_ = 1.0;
  Adam adam_;
};

}  // namespace bpo::trpo
