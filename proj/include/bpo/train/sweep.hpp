#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "bpo/train/evaluate.hpp"

namespace bpo {

inline const std::vector<int> kDefaultSweepBins = {3, 10, 100, 500, 1000};

struct SweepRow {
  int bins = 0;
  Algorithm algorithm = Algorithm::kBpo;
  EvalResult eval;  // of the best seed
  std::uint64_t best_seed = 0;
};

inline constexpr const char* kSweepHeader = "K,algorithm,mean_return,ci95";

/// Trains bpo and bpo_minus at each latent discretization with identical
/// budgets and seeds, reporting the best seed of each.
inline std::vector<SweepRow> discretization_sweep(
    const TrainConfig& config, const std::vector<int>& bins = kDefaultSweepBins,
    const std::vector<Algorithm>& algorithms = {Algorithm::kBpo, Algorithm::kBpoMinus},
    const std::function<void(const SweepRow&)>& on_row = {}) {
  std::vector<SweepRow> rows;
  for (int k : bins) {
    for (Algorithm alg : algorithms) {
      TrainConfig c = config;
      c.bins = k;
      c.algorithm = alg;
      const BestOfSeeds result = train_best_of_seeds(c);
      SweepRow row{k, alg, result.best_run().eval, result.best_run().seed};
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline void write_sweep_row(std::ostream& os, const SweepRow& row) {
  os << row.bins << ',' << to_string(row.algorithm) << ',' << row.eval.mean << ',' << row.eval.ci95 << '\n';
}

}  // namespace bpo
