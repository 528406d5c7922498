#pragma once

#include <cmath>
#include <string>

#include "bpo/core/bamdp.hpp"
#include "bpo/core/belief.hpp"
#include "bpo/core/errors.hpp"

namespace bpo {

/// Exact Bayes update of categorical weights over grid centers:
///   w'_i = w_i L(phi_i) / sum_j w_j L(phi_j).
/// `likelihood(center)` returns the probability (or density) of the evidence
/// under that latent value. Throws ZeroLikelihood when the evidence is
/// impossible under every center with nonzero weight.
template <typename Likelihood>
CategoricalBelief categorical_update(const CategoricalBelief& belief, const LatentGrid& grid,
                                     Likelihood&& likelihood) {
  const Eigen::Index n = belief.weights.size();
  if (static_cast<std::size_t>(n) != grid.size())
    throw FilterError("belief has " + std::to_string(n) + " weights but grid has " +
                      std::to_string(grid.size()) + " centers");
  Eigen::VectorXd posterior(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = belief.weights[i];
    if (w == 0.0) {
      posterior[i] = 0.0;
      continue;
    }
    const double l = likelihood(grid.center(static_cast<std::size_t>(i)));
    if (!(l >= 0.0) || !std::isfinite(l)) throw FilterError("likelihood must be finite and nonnegative");
    posterior[i] = w * l;
  }
  const double eta = posterior.sum();
  if (!(eta > 0.0)) throw ZeroLikelihood("evidence has zero likelihood under the discretized model");
  posterior /= eta;
  return {std::move(posterior)};
}

}  // namespace bpo
