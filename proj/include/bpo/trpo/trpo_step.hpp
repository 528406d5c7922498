#pragma once

#include <cmath>
#include <vector>

#include "bpo/trpo/baseline.hpp"
#include "bpo/trpo/conjugate_gradient.hpp"
#include "bpo/trpo/gae.hpp"
#include "bpo/trpo/line_search.hpp"
#include "bpo/trpo/policy_objective.hpp"

namespace bpo::trpo {

struct TrpoOptions {
  double max_kl = 0.01;
  double discount = 1.0;
  double gae_lambda = 0.96;
  double cg_damping = 1e-3;
  int cg_iters = 10;
  double backtrack_ratio = 0.8;
  int max_backtracks = 15;
  BaselineOptions baseline;
};

/// One iteration's samples. `policy.advantages` is filled in by trpo_step.
struct TrainingBatch {
  PolicyBatch policy;
  Matrix value_states;   // value-function state input (state and time feature)
  Matrix value_beliefs;  // value-function belief input
  std::vector<Vector> rewards;  // per trajectory, in sample order
};

struct TrpoDiagnostics {
  double mean_kl = 0.0;
  double surrogate_improvement = 0.0;
  double policy_entropy = 0.0;
  bool accepted = false;
  int backtracks = -1;
  BaselineFit baseline;
};

/// Natural-gradient step of size sqrt(2 max_kl / x^T A x) along x = A^-1 g,
/// where A is the damped Fisher matrix.
inline Vector scaled_natural_step(const PolicyObjective& objective, const Vector& gradient, const TrpoOptions& opt) {
  const Vector x = conjugate_gradient(
      [&](const Vector& v) { return objective.fisher_vector_product(v, opt.cg_damping); }, gradient, opt.cg_iters);
  const double xax = x.dot(objective.fisher_vector_product(x, opt.cg_damping));
  if (!(xax > 0.0) || !std::isfinite(xax)) return Vector::Zero(gradient.size());
  return std::sqrt(2.0 * opt.max_kl / xax) * x;
}

/// Advantage estimation, trust-region policy update and baseline refit.
inline TrpoDiagnostics trpo_step(const net::Policy& policy, Vector& theta, ValueFunction& value, TrainingBatch& batch,
                                 const TrpoOptions& opt, Rng& baseline_rng) {
  TrpoDiagnostics diag;
  const Vector predicted = value.predict(batch.value_states, batch.value_beliefs);
  std::vector<Vector> values;
  values.reserve(batch.rewards.size());
  Index offset = 0;
  for (const Vector& r : batch.rewards) {
    Vector v = Vector::Zero(r.size() + 1);  // episodes end at the true horizon: bootstrap 0
    v.head(r.size()) = predicted.segment(offset, r.size());
    values.push_back(std::move(v));
    offset += r.size();
  }
  const GaeResult gae = compute_gae(batch.rewards, values, opt.discount, opt.gae_lambda, true);
  batch.policy.advantages = gae.advantages;

  const PolicyObjective objective(policy, batch.policy, theta);
  diag.policy_entropy = objective.mean_entropy();
  const Vector gradient = objective.surrogate_gradient();
  if (gradient.allFinite() && gradient.squaredNorm() > 0.0) {
    const Vector step = scaled_natural_step(objective, gradient, opt);
    if (step.allFinite() && step.squaredNorm() > 0.0) {
      const LineSearchResult ls = line_search(
          theta, step, [&](const Vector& candidate) { return objective.evaluate(candidate); }, opt.max_kl,
          opt.backtrack_ratio, opt.max_backtracks);
      if (ls.accepted) {
        theta = ls.params;
        diag.accepted = true;
        diag.backtracks = ls.exponent;
        diag.mean_kl = ls.evaluation.kl;
        diag.surrogate_improvement = ls.evaluation.improvement;
      }
    }
  }
  diag.baseline = value.fit(batch.value_states, batch.value_beliefs, gae.targets, opt.baseline, baseline_rng);
  return diag;
}

}  // namespace bpo::trpo
