#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace bpo::trpo {

/// Surrogate improvement and mean KL(old || new) of a candidate parameter vector.
struct StepEvaluation {
  double improvement = 0.0;
  double kl = 0.0;
};

struct LineSearchResult {
  Eigen::VectorXd params;
  bool accepted = false;
  int exponent = -1;  // accepted step = ratio^exponent * full step
  StepEvaluation evaluation;
};

/// Backtracking search along `full_step`: tries ratio^k for k = 0..max_steps-1
/// and accepts the first candidate whose mean KL is within `max_kl` and whose
/// surrogate improvement is positive. On failure the old parameters come back
/// with `accepted == false`.
template <typename Evaluate>
LineSearchResult line_search(const Eigen::VectorXd& params, const Eigen::VectorXd& full_step, Evaluate&& evaluate,
                             double max_kl = 0.01, double ratio = 0.8, int max_steps = 15) {
  double scale = 1.0;
  for (int k = 0; k < max_steps; ++k, scale *= ratio) {
    Eigen::VectorXd candidate = params + scale * full_step;
    const StepEvaluation e = evaluate(candidate);
    if (std::isfinite(e.kl) && std::isfinite(e.improvement) && e.kl <= max_kl && e.improvement > 0.0)
      return {std::move(candidate), true, k, e};
  }
  return {params, false, -1, {}};
}

}  // namespace bpo::trpo
