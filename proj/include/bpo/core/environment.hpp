#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "bpo/core/bamdp.hpp"
#include "bpo/core/belief.hpp"
#include "bpo/core/rng.hpp"

namespace bpo {

/// An action: an index for discrete spaces, a vector for continuous ones.
struct Action {
  int index = -1;
  Eigen::VectorXd value;

  static Action discrete(int i) { return {i, {}}; }
  static Action continuous(Eigen::VectorXd v) { return {-1, std::move(v)}; }

  bool is_discrete() const { return index >= 0; }

  /// Numeric columns used in trajectory dumps.
  Eigen::VectorXd as_vector() const {
    if (is_discrete()) return Eigen::VectorXd::Constant(1, index);
    return value;
  }
};

/// What a Bayes filter may condition on after one step: the observable
/// transition (s, a', s') and, for partially observed environments, o'.
struct Evidence {
  Eigen::VectorXd state;
  Action action;
  Eigen::VectorXd next_state;
  Eigen::VectorXd observation;
};

struct StepOutcome {
  double reward = 0.0;
  Eigen::VectorXd next_state;
  Evidence evidence;
  bool done = false;  // early termination; the benchmark environments never set it
};

class BayesFilter;

/// One environment instance at a fixed latent parameter. Instances are
/// single-owner; clone() gives each rollout worker its own copy.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const BamdpSpec& spec() const = 0;

  /// Starts an episode in the MDP indexed by `latent`; returns the observable state.
  virtual Eigen::VectorXd reset(const LatentVector& latent, Rng& rng) = 0;

  virtual StepOutcome step(const Action& action, Rng& rng) = 0;

  /// Current true latent value. Diagnostics only; never part of a policy input.
  virtual LatentVector true_latent() const = 0;

  /// Bayes filter matching this environment's model. `bins` is the number of
  /// bins per continuous latent dimension (ignored by Gaussian filters).
  virtual std::unique_ptr<BayesFilter> make_filter(int bins) const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace bpo
