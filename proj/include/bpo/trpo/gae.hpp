#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace bpo::trpo {

struct GaeResult {
  Eigen::VectorXd advantages;  // flattened over all trajectories, in order
  Eigen::VectorXd targets;     // lambda-returns A_t + V_t (before normalization of A)
};

/// Generalized advantage estimation.
///   delta_t = r_t + gamma V_{t+1} - V_t,  A_t = sum_l (gamma lambda)^l delta_{t+l}
/// `values[i]` has one more entry than `rewards[i]`; the last one is the
/// bootstrap value of the final state (0 at a true episode end).
inline GaeResult compute_gae(const std::vector<Eigen::VectorXd>& rewards, const std::vector<Eigen::VectorXd>& values,
                             double gamma, double lambda, bool normalize) {
  Eigen::Index total = 0;
  for (const auto& r : rewards) total += r.size();
  GaeResult out{Eigen::VectorXd(total), Eigen::VectorXd(total)};
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const Eigen::VectorXd& r = rewards[i];
    const Eigen::VectorXd& v = values[i];
    double acc = 0.0;
    for (Eigen::Index t = r.size(); t-- > 0;) {
      const double delta = r[t] + gamma * v[t + 1] - v[t];
      acc = delta + gamma * lambda * acc;
      out.advantages[offset + t] = acc;
      out.targets[offset + t] = acc + v[t];
    }
    offset += r.size();
  }
  if (normalize && total > 0) {
    const double mean = out.advantages.mean();
    const double var = (out.advantages.array() - mean).square().mean();
    out.advantages = (out.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
  }
  return out;
}

}  // namespace bpo::trpo
