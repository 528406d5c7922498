#pragma once

#include <cmath>

#include "bpo/core/belief.hpp"
#include "bpo/core/errors.hpp"

namespace bpo {

/// Extended Kalman update for a diagonal Gaussian with deterministic additive
/// dynamics (no process noise) and a direct, state-dependent-noise observation
/// of the latent.
///
/// Predict: mean <- dynamics(mean, action); variance unchanged.
/// Correct, per dimension d with v_obs = obs_noise(predicted mean)[d]:
///   v_post    = (1/v_prior + 1/v_obs)^-1
///   mean_post = v_post * (mean_prior / v_prior + o_d / v_obs)
template <typename Dynamics, typename ObsNoise>
GaussianBelief ekf_update(const GaussianBelief& belief, const Eigen::VectorXd& action,
                          const Eigen::VectorXd& observation, Dynamics&& dynamics, ObsNoise&& obs_noise) {
  if (!is_valid(belief)) throw FilterError("Gaussian belief must have finite mean and positive variance");
  if (observation.size() != belief.mean.size()) throw FilterError("observation width mismatch");
  if (!observation.allFinite()) throw FilterError("observation is not finite");

  const Eigen::VectorXd predicted = dynamics(belief.mean, action);
  const Eigen::VectorXd v_obs = obs_noise(predicted);
  if (v_obs.size() != predicted.size() || !v_obs.allFinite() || (v_obs.array() <= 0.0).any())
    throw FilterError("observation noise must be finite and strictly positive");

  GaussianBelief out{predicted, belief.variance};
  for (Eigen::Index d = 0; d < predicted.size(); ++d) {
    const double v_prior = belief.variance[d];
    const double v_post = 1.0 / (1.0 / v_prior + 1.0 / v_obs[d]);
    out.mean[d] = v_post * (predicted[d] / v_prior + observation[d] / v_obs[d]);
    out.variance[d] = v_post;
  }
  if (!is_valid(out)) throw FilterError("posterior variance degenerated");
  return out;
}

}  // namespace bpo
