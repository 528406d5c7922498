#pragma once

#include <chrono>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "bpo/filters/estimates.hpp"
#include "bpo/train/agent.hpp"
#include "bpo/trpo/trpo_step.hpp"

namespace bpo {

struct IterationDiagnostics {
  int iteration = 0;
  double mean_return = 0.0;
  double mean_kl = 0.0;
  double surrogate_improvement = 0.0;
  double policy_entropy = 0.0;
  double belief_entropy_mean = 0.0;
  double wallclock = 0.0;
  bool accepted = false;
};

inline constexpr const char* kDiagnosticsHeader =
    "iteration,mean_return,mean_kl,surrogate_improvement,policy_entropy,belief_entropy_mean,wallclock";

inline void write_diagnostics_row(std::ostream& os, const IterationDiagnostics& d) {
  const auto precision = os.precision(std::numeric_limits<double>::max_digits10);
  os << d.iteration << ',' << d.mean_return << ',' << d.mean_kl << ',' << d.surrogate_improvement << ','
     << d.policy_entropy << ',' << d.belief_entropy_mean << ',' << std::setprecision(6) << d.wallclock << '\n';
  os.precision(precision);
}

struct TrainResult {
  Vector best_params;   // parameters whose sampling batch had the highest mean return
  Vector final_params;
  int best_iteration = -1;
  double best_mean_return = -std::numeric_limits<double>::infinity();
  std::vector<IterationDiagnostics> history;
  FilterStats filter_stats;
  trpo::ValueFunction value;
};

/// Flattens trajectories into policy/value inputs for one optimizer step.
inline trpo::TrainingBatch assemble_batch(const Agent& agent, const std::vector<Trajectory>& trajectories) {
  Index n = 0;
  for (const auto& t : trajectories) n += static_cast<Index>(t.length());
  const Index state_dim = agent.spec().state_dim;
  const Index belief_dim = agent.belief_input_dim();
  const bool discrete = agent.policy().discrete();

  trpo::TrainingBatch batch;
  batch.policy.states.resize(state_dim, n);
  batch.policy.beliefs.resize(belief_dim, n);
  batch.value_states.resize(state_dim + 1, n);
  if (discrete) {
    batch.policy.discrete_actions.resize(n);
  } else {
    batch.policy.continuous_actions.resize(agent.policy().action_dim(), n);
  }
  const double horizon = static_cast<double>(agent.config().horizon);
  Index i = 0;
  for (const auto& traj : trajectories) {
    Vector rewards(static_cast<Index>(traj.length()));
    for (std::size_t t = 0; t < traj.length(); ++t, ++i) {
      if (state_dim > 0) batch.policy.states.col(i) = traj.states[t];
      if (belief_dim > 0) batch.policy.beliefs.col(i) = agent.belief_input(traj.beliefs[t]);
      batch.value_states.col(i).head(state_dim) = traj.states[t];
      batch.value_states(state_dim, i) = static_cast<double>(t) / horizon;
      if (discrete) {
        batch.policy.discrete_actions[i] = traj.actions[t].index;
      } else {
        batch.policy.continuous_actions.col(i) = traj.actions[t].value;
      }
      rewards[static_cast<Index>(t)] = traj.rewards[t];
    }
    batch.rewards.push_back(std::move(rewards));
  }
  batch.value_beliefs = batch.policy.beliefs;
  return batch;
}

inline trpo::TrpoOptions trpo_options(const TrainConfig& c) {
  trpo::TrpoOptions o;
  o.max_kl = c.step_size;
  o.discount = c.discount;
  o.gae_lambda = c.gae_lambda;
  o.cg_damping = c.cg_damping;
  o.cg_iters = c.cg_iters;
  o.backtrack_ratio = c.backtrack_ratio;
  o.max_backtracks = c.max_backtracks;
  o.baseline = {c.vf_epochs, c.vf_learning_rate, c.vf_minibatch};
  return o;
}

/// The outer training loop shared by every algorithm: sample latent MDPs,
/// simulate with belief tracking, take one trust-region step, and keep the
/// parameters with the best batch mean return.
class Trainer {
 public:
  using Progress = std::function<void(const IterationDiagnostics&)>;

  explicit Trainer(const TrainConfig& config) : agent_(config) {}

  const Agent& agent() const { return agent_; }

  TrainResult run(std::ostream* diagnostics_csv = nullptr, const Progress& progress = {}) const {
    const TrainConfig& c = agent_.config();
    Rng policy_rng = make_stream(c.seed, kInitStream, 0);
    Rng value_rng = make_stream(c.seed, kInitStream, 1);
    TrainResult result;
    Vector theta = agent_.policy().init_params(policy_rng);
    result.value = trpo::ValueFunction(agent_.value_config(), value_rng);
    const trpo::TrpoOptions options = trpo_options(c);
    const auto start = std::chrono::steady_clock::now();
    if (diagnostics_csv) *diagnostics_csv << kDiagnosticsHeader << '\n';

    for (int it = 0; it < c.n_itr; ++it) {
      RolloutSet rollouts = collect_rollouts(agent_, theta, c.seed, static_cast<std::uint64_t>(it),
                                             c.trajectories_per_iteration(), c.workers);
      result.filter_stats += rollouts.filter_stats;

      IterationDiagnostics d;
      d.iteration = it;
      double belief_entropy = 0.0;
      std::size_t belief_count = 0;
      for (const auto& traj : rollouts.trajectories) {
        d.mean_return += traj.discounted_return(c.discount);
        for (std::size_t t = 0; t < traj.length(); ++t) belief_entropy += bpo::belief_entropy(traj.beliefs[t]);
        belief_count += traj.length();
      }
      d.mean_return /= static_cast<double>(rollouts.trajectories.size());
      d.belief_entropy_mean = belief_count ? belief_entropy / static_cast<double>(belief_count) : 0.0;
      if (d.mean_return > result.best_mean_return) {
        result.best_mean_return = d.mean_return;
        result.best_params = theta;
        result.best_iteration = it;
      }

      trpo::TrainingBatch batch = assemble_batch(agent_, rollouts.trajectories);
      Rng baseline_rng = make_stream(c.seed, kBaselineStream, static_cast<std::uint64_t>(it));
      const trpo::TrpoDiagnostics step = trpo::trpo_step(agent_.policy(), theta, result.value, batch, options, baseline_rng);
      d.mean_kl = step.mean_kl;
      d.surrogate_improvement = step.surrogate_improvement;
      d.policy_entropy = step.policy_entropy;
      d.accepted = step.accepted;
      d.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!std::isfinite(d.mean_return) || !std::isfinite(d.policy_entropy))
        throw std::runtime_error("non-finite diagnostics at iteration " + std::to_string(it));
      if (diagnostics_csv) write_diagnostics_row(*diagnostics_csv, d);
      if (progress) progress(d);
      result.history.push_back(d);
    }
    result.final_params = theta;
    if (result.best_iteration < 0) result.best_params = theta;
    return result;
  }

 private:
  Agent agent_;
};

inline TrainResult bpo_train(TrainConfig config, std::ostream* diagnostics_csv = nullptr,
                             const Trainer::Progress& progress = {}) {
  return Trainer(config).run(diagnostics_csv, progress);
}

inline TrainResult upmle_train(TrainConfig config, std::ostream* diagnostics_csv = nullptr,
                               const Trainer::Progress& progress = {}) {
  config.algorithm = Algorithm::kUpmle;
  return Trainer(config).run(diagnostics_csv, progress);
}

inline TrainResult robust_train(TrainConfig config, std::ostream* diagnostics_csv = nullptr,
                                const Trainer::Progress& progress = {}) {
  config.algorithm = Algorithm::kRobust;
  return Trainer(config).run(diagnostics_csv, progress);
}

}  // namespace bpo
