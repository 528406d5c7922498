#pragma once

#include <variant>

#include "bpo/core/bamdp.hpp"
#include "bpo/core/simulate.hpp"
#include "bpo/net/distributions.hpp"
#include "bpo/net/dual_encoder.hpp"

namespace bpo::net {

/// Distribution parameters for one input: probabilities (discrete) or
/// mean and log-std (continuous).
struct ActionDistribution {
  Vector probs;
  Vector mean;
  Vector log_std;

  bool discrete() const { return probs.size() > 0; }

  double log_prob(const Action& a) const {
    return discrete() ? categorical_log_prob(probs, a.index) : gaussian_log_prob(mean, log_std, a.value);
  }

  double entropy() const { return discrete() ? categorical_entropy(probs) : gaussian_entropy(log_std); }

  Action sample(Rng& rng) const {
    return discrete() ? Action::discrete(sample_categorical(probs, rng))
                      : Action::continuous(sample_gaussian(mean, log_std, rng));
  }
};

/// KL(p || q) between two distributions of the same family.
inline double kl(const ActionDistribution& p, const ActionDistribution& q) {
  return p.discrete() ? categorical_kl(p.probs, q.probs) : gaussian_kl(p.mean, p.log_std, q.mean, q.log_std);
}

/// Stochastic policy over a DualEncoderNet. Flat parameter layout is
/// [network | log-std (continuous only)].
class Policy {
 public:
  Policy() = default;

  /// `net.output_dim` is overwritten from the action space.
  Policy(NetworkConfig net, const ActionSpace& space) {
    if (const auto* d = std::get_if<DiscreteActions>(&space)) {
      discrete_ = true;
      action_dim_ = d->count;
    } else {
      discrete_ = false;
      action_dim_ = std::get<ContinuousActions>(space).dim;
    }
    if (action_dim_ < 1) throw ConfigError("policy needs at least one action dimension");
    net.output_dim = action_dim_;
    net_ = DualEncoderNet(net);
  }

  bool discrete() const { return discrete_; }
  Index action_dim() const { return action_dim_; }
  const DualEncoderNet& network() const { return net_; }
  Index log_std_offset() const { return net_.num_params(); }
  Index num_params() const { return net_.num_params() + (discrete_ ? 0 : action_dim_); }

  Vector init_params(Rng& rng) const {
    Vector theta = Vector::Zero(num_params());
    net_.init(theta, rng);
    return theta;
  }

  Vector log_std(const Vector& theta) const {
    if (discrete_) return {};
    return theta.segment(log_std_offset(), action_dim_);
  }

  /// Batch forward: logits (discrete) or means (continuous), one column per sample.
  Matrix forward(const Vector& theta, const Matrix& states, const Matrix& beliefs, DualEncoderNet::Cache& cache) const {
    return net_.forward(theta, states, beliefs, cache);
  }

  Matrix forward(const Vector& theta, const Matrix& states, const Matrix& beliefs) const {
    return net_.forward(theta, states, beliefs);
  }

  ActionDistribution distribution(const Vector& theta, const Vector& state, const Vector& belief) const {
    const Matrix out = net_.forward(theta, column(state), column(belief));
    ActionDistribution d;
    if (discrete_) {
      d.probs = softmax(out.col(0));
    } else {
      d.mean = out.col(0);
      d.log_std = log_std(theta);
    }
    return d;
  }

  ActionSample act(const Vector& theta, const Vector& state, const Vector& belief, Rng& rng) const {
    const ActionDistribution d = distribution(theta, state, belief);
    ActionSample s{d.sample(rng), 0.0};
    s.log_prob = d.log_prob(s.action);
    return s;
  }

 private:
  static Matrix column(const Vector& v) { return Eigen::Map<const Matrix>(v.data(), v.size(), 1); }

  DualEncoderNet net_;
  bool discrete_ = true;
  Index action_dim_ = 0;
};

}  // namespace bpo::net
