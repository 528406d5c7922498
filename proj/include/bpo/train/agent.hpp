#pragma once

#include <exception>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

#include "bpo/core/simulate.hpp"
#include "bpo/net/policy.hpp"
#include "bpo/train/config.hpp"

namespace bpo {

using net::Index;
using net::Matrix;
using net::Vector;

/// Everything needed to act in one environment under one algorithm: the
/// environment prototype, its Bayes filter, and the policy architecture with
/// its input routing.
class Agent {
 public:
  explicit Agent(const TrainConfig& config) : config_(config), env_(make_environment(config)) {
    config.validate();
    filter_ = env_->make_filter(config.bins);
    const BamdpSpec& spec = env_->spec();
    switch (config.algorithm) {
      case Algorithm::kBpo:
      case Algorithm::kBpoMinus:
        belief_dim_ = belief_width(filter_->initial_belief());
        break;
      case Algorithm::kUpmle:
        belief_dim_ = spec.latent_dim();
        break;
      case Algorithm::kRobust:
      case Algorithm::kNominal:
        belief_dim_ = 0;
        break;
    }
    net::NetworkConfig net;
    net.state_dim = spec.state_dim;
    net.belief_dim = belief_dim_;
    net.hidden = config.hidden;
    net.routing = config.algorithm == Algorithm::kBpoMinus ? net::InputRouting::kRaw : net::InputRouting::kEncoded;
    net.output_gain = config.policy_output_gain;
    policy_ = net::Policy(net, spec.action_space);
  }

  Agent(const Agent& other) : Agent(other.config_) {}

  const TrainConfig& config() const { return config_; }
  const Environment& environment() const { return *env_; }
  const BamdpSpec& spec() const { return env_->spec(); }
  const BayesFilter& filter() const { return *filter_; }
  const net::Policy& policy() const { return policy_; }
  Index belief_input_dim() const { return belief_dim_; }

  /// Value function: same inputs as the policy plus normalized time t/H on the
  /// state side. Value estimates never influence the policy's inputs.
  net::NetworkConfig value_config() const {
    net::NetworkConfig c = policy_.network().config();
    c.state_dim = spec().state_dim + 1;
    c.output_dim = 1;
    c.output_gain = 1.0;
    return c;
  }

  /// The belief-side policy input for this algorithm.
  Vector belief_input(const Belief& belief) const {
    switch (config_.algorithm) {
      case Algorithm::kBpo:
      case Algorithm::kBpoMinus:
        return belief_vector(belief);
      case Algorithm::kUpmle: {
        const LatentVector mle = filter_->mle(belief);
        Vector out(mle.size());
        for (Index d = 0; d < mle.size(); ++d) {
          const auto& dim = spec().latent_prior[static_cast<std::size_t>(d)];
          const double lo = latent_lower(dim), hi = latent_upper(dim);
          out[d] = hi > lo ? (mle[d] - lo) / (hi - lo) : 0.0;
        }
        return out;
      }
      case Algorithm::kRobust:
      case Algorithm::kNominal:
        break;
    }
    return {};
  }

  /// Draws the episode's latent MDP. Nominal training always uses the prior midpoint.
  LatentVector sample_latent(Rng& rng) const {
    if (config_.algorithm != Algorithm::kNominal) return sample_latent_mdp(spec(), rng);
    LatentVector phi(spec().latent_dim());
    for (int d = 0; d < spec().latent_dim(); ++d) {
      const auto& dim = spec().latent_prior[static_cast<std::size_t>(d)];
      if (const auto* r = std::get_if<LatentRange>(&dim)) {
        phi[d] = 0.5 * (r->lower + r->upper);
      } else {
        phi[d] = std::get<LatentSupport>(dim).values.front();
      }
    }
    return phi;
  }

  ActionSample act(const Vector& theta, const Vector& state, const Belief& belief, Rng& rng) const {
    return policy_.act(theta, state, belief_input(belief), rng);
  }

  SimulateOptions simulate_options() const { return {config_.strict_filter, config_.freeze_belief}; }

 private:
  TrainConfig config_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<BayesFilter> filter_;
  net::Policy policy_;
  Index belief_dim_ = 0;
};

/// One episode in `env` from `latent`, or from a prior draw when none is given.
inline Trajectory run_episode(const Agent& agent, const Vector& theta, Environment& env, Rng& rng,
                              const std::optional<LatentVector>& latent = std::nullopt, FilterStats* stats = nullptr) {
  const auto policy = [&](const Vector& s, const Belief& b, Rng& r) { return agent.act(theta, s, b, r); };
  const LatentVector phi = latent ? *latent : agent.sample_latent(rng);
  return simulate(policy, agent.filter(), env, phi, agent.filter().initial_belief(), agent.config().horizon, rng,
                  agent.simulate_options(), stats);
}

struct RolloutSet {
  std::vector<Trajectory> trajectories;
  FilterStats filter_stats;
};

/// Simulates `count` episodes; episode j uses the stream (seed, stream, j), so
/// the result is independent of how episodes are spread over `workers`.
template <typename Setup = std::nullptr_t>
RolloutSet collect_rollouts(const Agent& agent, const Vector& theta, std::uint64_t seed, std::uint64_t stream, int count,
                            int workers, Setup setup = nullptr) {
  RolloutSet out;
  out.trajectories.resize(static_cast<std::size_t>(count));
  const int n_workers = std::max(1, std::min(workers, count));
  std::vector<FilterStats> stats(static_cast<std::size_t>(n_workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
  auto work = [&](int w) {
    try {
      auto env = agent.environment().clone();
      if constexpr (!std::is_same_v<Setup, std::nullptr_t>) setup(*env);
      for (int j = w; j < count; j += n_workers) {
        Rng rng = make_stream(seed, stream, static_cast<std::uint64_t>(j));
        Trajectory traj = run_episode(agent, theta, *env, rng, std::nullopt, &stats[static_cast<std::size_t>(w)]);
        traj.seed = stream_key(seed, stream, static_cast<std::uint64_t>(j));
        out.trajectories[static_cast<std::size_t>(j)] = std::move(traj);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };

  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& s : stats) out.filter_stats += s;
  return out;
}

}  // namespace bpo
