#pragma once

#include <cmath>
#include <numbers>

#include "bpo/core/bamdp.hpp"
#include "bpo/core/belief.hpp"

namespace bpo {

/// Point estimate of the latent: the center of the heaviest bin (lowest index
/// wins ties) or the Gaussian mean.
inline LatentVector mle_estimate(const Belief& belief, const LatentGrid& grid) {
  if (const auto* c = std::get_if<CategoricalBelief>(&belief)) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < c->weights.size(); ++i)
      if (c->weights[i] > c->weights[best]) best = i;
    return grid.center(static_cast<std::size_t>(best));
  }
  return std::get<GaussianBelief>(belief).mean;
}

/// Entropy in nats. Categorical: -sum w ln w (0 ln 0 = 0). Gaussian:
/// differential entropy 1/2 sum ln(2 pi e v).
inline double belief_entropy(const Belief& belief) {
  if (const auto* c = std::get_if<CategoricalBelief>(&belief)) {
    double h = 0.0;
    for (double w : c->weights)
      if (w > 0.0) h -= w * std::log(w);
    return h;
  }
  const auto& g = std::get<GaussianBelief>(belief);
  double h = 0.0;
  for (double v : g.variance) h += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * v);
  return h;
}

}  // namespace bpo
