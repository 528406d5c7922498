#pragma once

#include "bpo/core/bamdp.hpp"
#include "bpo/core/belief.hpp"
#include "bpo/core/environment.hpp"
#include "bpo/filters/estimates.hpp"

namespace bpo {

/// Black-box recursive posterior update b' = F(b, evidence). Implementations
/// are immutable after construction and safe to share between workers.
class BayesFilter {
 public:
  virtual ~BayesFilter() = default;

  virtual Belief initial_belief() const = 0;

  /// Throws ZeroLikelihood when the evidence is impossible under the model.
  virtual Belief update(const Belief& belief, const Evidence& evidence) const = 0;

  /// Grid the categorical weights refer to. Gaussian filters return an empty grid.
  virtual const LatentGrid& grid() const = 0;

  LatentVector mle(const Belief& belief) const { return mle_estimate(belief, grid()); }
};

}  // namespace bpo
