#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bpo/train/trainer.hpp"

namespace bpo {

struct EvalResult {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width, 1.96 standard errors
  bool ci_defined = false;  // false for fewer than two episodes (ci95 is then +inf)
  std::vector<double> returns;
};

inline EvalResult summarize_returns(std::vector<double> returns) {
  EvalResult r;
  r.returns = std::move(returns);
  const auto n = static_cast<double>(r.returns.size());
  if (r.returns.empty()) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.ci95 = std::numeric_limits<double>::infinity();
    return r;
  }
  for (double x : r.returns) r.mean += x;
  r.mean /= n;
  if (r.returns.size() < 2) {
    r.ci95 = std::numeric_limits<double>::infinity();
    return r;
  }
  double ss = 0.0;
  for (double x : r.returns) ss += (x - r.mean) * (x - r.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  r.ci95 = 1.96 * sd / std::sqrt(n);
  r.ci_defined = true;
  return r;
}

/// Stochastic-policy evaluation on freshly sampled latent MDPs. Episode i uses
/// the stream (eval_seed, kEvalStream, i), so different policies evaluated with
/// the same seed face the same latent draws.
inline EvalResult evaluate(const Agent& agent, const Vector& theta, int n_episodes, std::uint64_t eval_seed,
                           int workers = 1) {
  const RolloutSet set = collect_rollouts(agent, theta, eval_seed, kEvalStream, n_episodes, workers);
  std::vector<double> returns;
  returns.reserve(set.trajectories.size());
  for (const auto& t : set.trajectories) returns.push_back(t.discounted_return(agent.config().discount));
  return summarize_returns(std::move(returns));
}

inline EvalResult evaluate(const TrainConfig& config, const Vector& theta) {
  return evaluate(Agent(config), theta, config.eval_episodes, config.eval_seed, config.workers);
}

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult train;
  EvalResult eval;
};

struct BestOfSeeds {
  std::vector<SeedRun> runs;
  std::size_t best = 0;  // index into runs with the highest evaluation mean
  const SeedRun& best_run() const { return runs.at(best); }
};

/// Trains `config.n_seeds` seeds (config.seed, config.seed + 1, ...) and
/// reports the one with the highest evaluation mean.
inline BestOfSeeds train_best_of_seeds(
    const TrainConfig& config, const std::function<void(std::uint64_t, const IterationDiagnostics&)>& progress = {}) {
  BestOfSeeds out;
  const Agent agent(config);
  for (int k = 0; k < config.n_seeds; ++k) {
    TrainConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(k);
    SeedRun run;
    run.seed = c.seed;
    Trainer::Progress p;
    if (progress) p = [&](const IterationDiagnostics& d) { progress(c.seed, d); };
    run.train = Trainer(c).run(nullptr, p);
    run.eval = evaluate(agent, run.train.best_params, c.eval_episodes, c.eval_seed, c.workers);
    out.runs.push_back(std::move(run));
    if (out.runs.back().eval.mean > out.runs[out.best].eval.mean) out.best = out.runs.size() - 1;
  }
  return out;
}

}  // namespace bpo
