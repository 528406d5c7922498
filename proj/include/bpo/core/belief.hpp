#pragma once

#include <cmath>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "bpo/core/errors.hpp"

namespace bpo {

/// Categorical weights over the centers of a LatentGrid.
struct CategoricalBelief {
  Eigen::VectorXd weights;
};

/// Diagonal Gaussian over a continuous latent.
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

using Belief = std::variant<CategoricalBelief, GaussianBelief>;

inline constexpr double kNormalizationTolerance = 1e-9;

inline bool is_valid(const CategoricalBelief& b) {
  if (b.weights.size() == 0) return false;
  if (!b.weights.allFinite() || (b.weights.array() < 0.0).any()) return false;
  return std::abs(b.weights.sum() - 1.0) <= kNormalizationTolerance;
}

inline bool is_valid(const GaussianBelief& b) {
  return b.mean.size() > 0 && b.mean.size() == b.variance.size() && b.mean.allFinite() &&
         b.variance.allFinite() && (b.variance.array() > 0.0).all();
}

inline bool is_valid(const Belief& b) {
  return std::visit([](const auto& x) { return is_valid(x); }, b);
}

inline CategoricalBelief uniform_belief(Eigen::Index size) {
  return {Eigen::VectorXd::Constant(size, 1.0 / static_cast<double>(size))};
}

/// Fixed-size numeric representation handed to the policy: weights, or
/// (mean, variance) stacked.
inline Eigen::VectorXd belief_vector(const Belief& b) {
  if (const auto* c = std::get_if<CategoricalBelief>(&b)) return c->weights;
  const auto& g = std::get<GaussianBelief>(b);
  Eigen::VectorXd v(g.mean.size() * 2);
  v << g.mean, g.variance;
  return v;
}

inline Eigen::Index belief_width(const Belief& b) {
  if (const auto* c = std::get_if<CategoricalBelief>(&b)) return c->weights.size();
  return 2 * std::get<GaussianBelief>(b).mean.size();
}

inline std::string belief_kind(const Belief& b) {
  return std::holds_alternative<CategoricalBelief>(b) ? "categorical" : "gaussian";
}

}  // namespace bpo
