#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bpo/core/errors.hpp"
#include "bpo/core/rng.hpp"

namespace bpo {

using LatentVector = Eigen::VectorXd;

/// Continuous latent dimension, sampled uniformly from [lower, upper].
struct LatentRange {
  double lower = 0.0;
  double upper = 1.0;
};

/// Discrete latent dimension, sampled uniformly from a finite support.
struct LatentSupport {
  std::vector<double> values;
};

using LatentDimension = std::variant<LatentRange, LatentSupport>;

struct DiscreteActions {
  int count = 0;
};

struct ContinuousActions {
  int dim = 0;
  double bound = 1.0;  // per-component magnitude limit applied by the environment
};

using ActionSpace = std::variant<DiscreteActions, ContinuousActions>;

/// A parameterized MDP family. Transition and reward models live in each environment.
struct BamdpSpec {
  std::string name;
  int state_dim = 0;
  ActionSpace action_space = DiscreteActions{};
  std::vector<LatentDimension> latent_prior;
  double discount = 1.0;
  int horizon = 1;

  int latent_dim() const { return static_cast<int>(latent_prior.size()); }
  bool discrete_actions() const { return std::holds_alternative<DiscreteActions>(action_space); }

  int action_width() const {
    if (const auto* d = std::get_if<DiscreteActions>(&action_space)) return d->count;
    return std::get<ContinuousActions>(action_space).dim;
  }

  void validate() const {
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError(name + ": discount must lie in [0, 1]");
    if (horizon < 1) throw ConfigError(name + ": horizon must be >= 1");
    if (state_dim < 0) throw ConfigError(name + ": state_dim must be >= 0");
    if (action_width() < 1) throw ConfigError(name + ": action space is empty");
    for (const auto& dim : latent_prior) {
      if (const auto* r = std::get_if<LatentRange>(&dim)) {
        if (!(r->lower < r->upper)) throw ConfigError(name + ": latent range needs lower < upper");
      } else if (std::get<LatentSupport>(dim).values.empty()) {
        throw ConfigError(name + ": latent support must be nonempty");
      }
    }
  }
};

inline double latent_lower(const LatentDimension& dim) {
  if (const auto* r = std::get_if<LatentRange>(&dim)) return r->lower;
  const auto& v = std::get<LatentSupport>(dim).values;
  double lo = v.front();
  for (double x : v) lo = std::min(lo, x);
  return lo;
}

inline double latent_upper(const LatentDimension& dim) {
  if (const auto* r = std::get_if<LatentRange>(&dim)) return r->upper;
  const auto& v = std::get<LatentSupport>(dim).values;
  double hi = v.front();
  for (double x : v) hi = std::max(hi, x);
  return hi;
}

/// Draws one latent MDP from the prior. Continuous dimensions are sampled in the
/// continuous range regardless of any discretization used by the filter.
inline LatentVector sample_latent_mdp(const BamdpSpec& spec, Rng& rng) {
  LatentVector phi(spec.latent_dim());
  for (int d = 0; d < spec.latent_dim(); ++d) {
    const auto& dim = spec.latent_prior[static_cast<std::size_t>(d)];
    if (const auto* r = std::get_if<LatentRange>(&dim)) {
      phi[d] = std::uniform_real_distribution<double>(r->lower, r->upper)(rng);
    } else {
      const auto& values = std::get<LatentSupport>(dim).values;
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      phi[d] = values[pick(rng)];
    }
  }
  return phi;
}

/// Uniform discretization of the latent prior. Continuous dimensions get K
/// equal-width bins represented by their midpoints; finite supports keep their
/// values. Centers are enumerated row-major (last dimension fastest).
class LatentGrid {
 public:
  LatentGrid() = default;

  LatentGrid(const std::vector<LatentDimension>& prior, int bins_per_dim) : bins_(bins_per_dim) {
    if (bins_per_dim < 1) throw ConfigError("latent grid needs at least one bin per dimension");
    std::vector<std::vector<double>> axes;
    for (const auto& dim : prior) {
      std::vector<double> axis;
      if (const auto* r = std::get_if<LatentRange>(&dim)) {
        const double width = (r->upper - r->lower) / bins_per_dim;
        for (int k = 0; k < bins_per_dim; ++k) axis.push_back(r->lower + (k + 0.5) * width);
      } else {
        axis = std::get<LatentSupport>(dim).values;
      }
      axes.push_back(std::move(axis));
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    centers_.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      LatentVector c(static_cast<Eigen::Index>(axes.size()));
      for (std::size_t d = 0; d < axes.size(); ++d) c[static_cast<Eigen::Index>(d)] = axes[d][idx[d]];
      centers_.push_back(std::move(c));
      for (std::size_t d = axes.size(); d-- > 0;) {
        if (++idx[d] < axes[d].size()) break;
        idx[d] = 0;
      }
    }
  }

  int bins_per_dim() const { return bins_; }
  std::size_t size() const { return centers_.size(); }
  const LatentVector& center(std::size_t i) const { return centers_[i]; }
  const std::vector<LatentVector>& centers() const { return centers_; }

 private:
  int bins_ = 1;
  std::vector<LatentVector> centers_;
};

}  // namespace bpo
