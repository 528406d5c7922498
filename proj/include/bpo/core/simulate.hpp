#pragma once

#include <cstddef>
#include <cstdint>

#include "bpo/core/environment.hpp"
#include "bpo/core/errors.hpp"
#include "bpo/core/trajectory.hpp"
#include "bpo/filters/bayes_filter.hpp"

namespace bpo {

/// Sampled action together with its log-probability under the sampling policy.
struct ActionSample {
  Action action;
  double log_prob = 0.0;
};

struct SimulateOptions {
  /// Abort on ZeroLikelihood instead of keeping the prior belief.
  bool strict_filter = true;
  /// Ablation: never call the filter; the belief stays at b0.
  bool freeze_belief = false;
};

/// Instrumentation shared by the training loop.
struct FilterStats {
  std::uint64_t updates = 0;
  std::uint64_t zero_likelihood = 0;

  FilterStats& operator+=(const FilterStats& o) {
    updates += o.updates;
    zero_likelihood += o.zero_likelihood;
    return *this;
  }
};

/// Rolls out one episode in the MDP indexed by `latent`. The policy is called
/// as policy(state, belief, rng) -> ActionSample and never sees the latent.
template <typename Policy>
Trajectory simulate(Policy&& policy, const BayesFilter& filter, Environment& env, const LatentVector& latent,
                    const Belief& initial_belief, int horizon, Rng& rng, const SimulateOptions& options = {},
                    FilterStats* stats = nullptr) {
  if (!is_valid(initial_belief)) throw SimulationError(0, "initial belief is invalid");
  Trajectory traj;
  traj.latent = latent;
  const auto steps = static_cast<std::size_t>(horizon);
  traj.states.reserve(steps + 1);
  traj.beliefs.reserve(steps + 1);
  traj.actions.reserve(steps);
  traj.rewards.reserve(steps);
  traj.log_probs.reserve(steps);
  traj.observations.reserve(steps);

  traj.states.push_back(env.reset(latent, rng));
  traj.beliefs.push_back(initial_belief);
  traj.latent_trace.push_back(env.true_latent());

  for (std::size_t t = 1; t <= steps; ++t) {
    const Belief& belief = traj.beliefs.back();
    ActionSample sample = policy(traj.states.back(), belief, rng);
    StepOutcome out = env.step(sample.action, rng);
    out.evidence.state = traj.states.back();
    out.evidence.action = sample.action;
    out.evidence.next_state = out.next_state;

    Belief next = belief;
    if (!options.freeze_belief) {
      try {
        next = filter.update(belief, out.evidence);
        if (stats) ++stats->updates;
      } catch (const ZeroLikelihood& e) {
        if (options.strict_filter) throw SimulationError(t, e.what());
        if (stats) ++stats->zero_likelihood;
      } catch (const FilterError& e) {
        throw SimulationError(t, e.what());
      }
    }

    traj.actions.push_back(std::move(sample.action));
    traj.log_probs.push_back(sample.log_prob);
    traj.rewards.push_back(out.reward);
    traj.observations.push_back(std::move(out.evidence.observation));
    traj.states.push_back(std::move(out.next_state));
    traj.beliefs.push_back(std::move(next));
    traj.latent_trace.push_back(env.true_latent());
    if (out.done) {
      traj.terminated = true;
      break;
    }
  }
  return traj;
}

/// Feeds a recorded trajectory's (s, a, s', o) sequence back through the filter.
inline std::vector<Belief> replay_beliefs(const Trajectory& traj, const BayesFilter& filter) {
  std::vector<Belief> out{traj.beliefs.front()};
  for (std::size_t t = 0; t < traj.length(); ++t) {
    Evidence ev{traj.states[t], traj.actions[t], traj.states[t + 1], traj.observations[t]};
    out.push_back(filter.update(out.back(), ev));
  }
  return out;
}

}  // namespace bpo
