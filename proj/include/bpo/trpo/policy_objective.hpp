#pragma once

#include <cmath>

#include "bpo/net/policy.hpp"
#include "bpo/trpo/line_search.hpp"

namespace bpo::trpo {

using net::Index;
using net::Matrix;
using net::Vector;

/// Flattened on-policy samples: inputs, actions taken, and their advantages.
struct PolicyBatch {
  Matrix states;                   // state_dim x N (may have 0 rows)
  Matrix beliefs;                  // belief_dim x N (may have 0 rows)
  Eigen::VectorXi discrete_actions;  // N, discrete policies
  Matrix continuous_actions;       // action_dim x N, continuous policies
  Vector advantages;               // N

  Index size() const { return advantages.size(); }
};

/// Importance-sampled surrogate L(theta) = mean_i exp(log pi_theta - log pi_old) A_i
/// and the mean KL(pi_old || pi_theta), linearized around fixed old parameters.
class PolicyObjective {
 public:
  PolicyObjective(const net::Policy& policy, const PolicyBatch& batch, Vector old_params)
      : policy_(policy), batch_(batch), old_params_(std::move(old_params)) {
    old_out_ = policy_.forward(old_params_, batch_.states, batch_.beliefs, old_cache_);
    old_log_std_ = policy_.log_std(old_params_);
    old_log_prob_ = log_probs(old_out_, old_log_std_);
    if (policy_.discrete()) old_probs_ = softmax_columns(old_out_);
  }

  const Vector& old_params() const { return old_params_; }
  const Vector& old_log_probs() const { return old_log_prob_; }

  /// Surrogate at the old parameters (ratio 1): mean advantage.
  double old_surrogate() const { return batch_.advantages.mean(); }

  /// Gradient of L at the old parameters: mean_i A_i grad log pi(a_i | x_i).
  Vector surrogate_gradient() const {
    const double n = static_cast<double>(batch_.size());
    Vector grad = Vector::Zero(policy_.num_params());
    Matrix d_out;
    if (policy_.discrete()) {
      d_out = -old_probs_;
      for (Index i = 0; i < batch_.size(); ++i) d_out(batch_.discrete_actions[i], i) += 1.0;
    } else {
      const Eigen::ArrayXd inv_var = (-2.0 * old_log_std_.array()).exp();
      d_out = (batch_.continuous_actions - old_out_).array().colwise() * inv_var;
      const Eigen::ArrayXXd z2 = (batch_.continuous_actions - old_out_).array().square().colwise() * inv_var;
      grad.segment(policy_.log_std_offset(), policy_.action_dim()) =
          ((z2 - 1.0).rowwise() * batch_.advantages.transpose().array()).rowwise().sum().matrix() / n;
    }
    d_out = d_out.array().rowwise() * (batch_.advantages.transpose().array() / n);
    policy_.network().backward(old_params_, old_cache_, d_out, grad);
    return grad;
  }

  /// (F + damping I) v where F is the Hessian of the mean KL(old || theta) at
  /// theta = old, in Gauss-Newton form J^T M J with M the Fisher matrix of the
  /// output distribution.
  Vector fisher_vector_product(const Vector& v, double damping) const {
    const double n = static_cast<double>(batch_.size());
    Vector out = Vector::Zero(policy_.num_params());
    Matrix jv = policy_.network().jvp(old_params_, v, old_cache_);
    if (policy_.discrete()) {
      const Eigen::RowVectorXd pj = (old_probs_.array() * jv.array()).colwise().sum();
      jv = old_probs_.array() * (jv.array().rowwise() - pj.array());
    } else {
      const Eigen::ArrayXd inv_var = (-2.0 * old_log_std_.array()).exp();
      jv = jv.array().colwise() * inv_var;
      out.segment(policy_.log_std_offset(), policy_.action_dim()) =
          2.0 * v.segment(policy_.log_std_offset(), policy_.action_dim());
    }
    jv /= n;
    policy_.network().backward(old_params_, old_cache_, jv, out);
    return out + damping * v;
  }

  /// Surrogate improvement over the old parameters and mean KL(old || theta).
  StepEvaluation evaluate(const Vector& theta) const {
    const Matrix out = policy_.forward(theta, batch_.states, batch_.beliefs);
    const Vector ls = policy_.log_std(theta);
    const Vector lp = log_probs(out, ls);
    const double surrogate = ((lp - old_log_prob_).array().exp() * batch_.advantages.array()).mean();
    return {surrogate - old_surrogate(), mean_kl(out, ls)};
  }

  double mean_kl(const Vector& theta) const {
    return mean_kl(policy_.forward(theta, batch_.states, batch_.beliefs), policy_.log_std(theta));
  }

  double surrogate(const Vector& theta) const { return evaluate(theta).improvement + old_surrogate(); }

  /// Gradient of the mean KL(old || theta) w.r.t. theta.
  Vector kl_gradient(const Vector& theta) const {
    const double n = static_cast<double>(batch_.size());
    net::DualEncoderNet::Cache cache;
    const Matrix out = policy_.forward(theta, batch_.states, batch_.beliefs, cache);
    Vector grad = Vector::Zero(policy_.num_params());
    Matrix d_out;
    if (policy_.discrete()) {
      d_out = (softmax_columns(out) - old_probs_) / n;
    } else {
      const Vector ls = policy_.log_std(theta);
      const Eigen::ArrayXd inv_var = (-2.0 * ls.array()).exp();
      const Eigen::ArrayXd old_var = (2.0 * old_log_std_.array()).exp();
      d_out = ((out - old_out_).array().colwise() * inv_var) / n;
      const Eigen::ArrayXXd sq = (out - old_out_).array().square();
      grad.segment(policy_.log_std_offset(), policy_.action_dim()) =
          (1.0 - ((sq.colwise() + old_var).colwise() * inv_var)).rowwise().mean().matrix();
    }
    policy_.network().backward(theta, cache, d_out, grad);
    return grad;
  }

  double mean_entropy() const {
    if (!policy_.discrete()) return net::gaussian_entropy(old_log_std_);
    double h = 0.0;
    for (Index i = 0; i < old_probs_.cols(); ++i) h += net::categorical_entropy(old_probs_.col(i));
    return h / static_cast<double>(old_probs_.cols());
  }

 private:
  static Matrix softmax_columns(const Matrix& logits) {
    Matrix p = (logits.rowwise() - logits.colwise().maxCoeff()).array().exp();
    p.array().rowwise() /= p.colwise().sum().array();
    return p;
  }

  Vector log_probs(const Matrix& out, const Vector& log_std) const {
    const Index n = batch_.size();
    Vector lp(n);
    if (policy_.discrete()) {
      for (Index i = 0; i < n; ++i) {
        const double m = out.col(i).maxCoeff();
        lp[i] = out(batch_.discrete_actions[i], i) - m - std::log((out.col(i).array() - m).exp().sum());
      }
    } else {
      for (Index i = 0; i < n; ++i) lp[i] = net::gaussian_log_prob(out.col(i), log_std, batch_.continuous_actions.col(i));
    }
    return lp;
  }

  double mean_kl(const Matrix& out, const Vector& log_std) const {
    const Index n = batch_.size();
    if (!policy_.discrete()) {
      const Eigen::ArrayXd var0 = (2.0 * old_log_std_.array()).exp();
      const Eigen::ArrayXd inv_var1 = (-2.0 * log_std.array()).exp();
      const double per_dim_const = (log_std - old_log_std_).sum() + 0.5 * ((var0 * inv_var1).sum() - static_cast<double>(log_std.size()));
      const double mean_term = 0.5 * ((out - old_out_).array().square().colwise() * inv_var1).sum() / static_cast<double>(n);
      return per_dim_const + mean_term;
    }
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double m = out.col(i).maxCoeff();
      const Eigen::ArrayXd log_q = out.col(i).array() - m - std::log((out.col(i).array() - m).exp().sum());
      const Eigen::ArrayXd p = old_probs_.col(i).array();
      const Eigen::ArrayXd log_p = p.log();
      total += (p * (log_p - log_q)).unaryExpr([](double x) { return std::isnan(x) ? 0.0 : x; }).sum();
    }
    return total / static_cast<double>(n);
  }

  const net::Policy& policy_;
  const PolicyBatch& batch_;
  Vector old_params_;
  net::DualEncoderNet::Cache old_cache_;
  Matrix old_out_;
  Matrix old_probs_;
  Vector old_log_std_;
  Vector old_log_prob_;
};

}  // namespace bpo::trpo
