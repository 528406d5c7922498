#pragma once

#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpo/core/bamdp.hpp"
#include "bpo/core/belief.hpp"
#include "bpo/core/environment.hpp"

namespace bpo {

/// (s0, b0, a1, r1, s1, b1, ..., aT, rT, sT, bT) for T <= H. `latent` and
/// `latent_trace` are diagnostics and never reach a policy.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Belief> beliefs;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<double> log_probs;
  std::vector<Eigen::VectorXd> observations;
  LatentVector latent;
  std::vector<LatentVector> latent_trace;
  std::uint64_t seed = 0;
  bool terminated = false;

  std::size_t length() const { return actions.size(); }

  double discounted_return(double discount) const {
    double total = 0.0;
    double scale = 1.0;
    for (double r : rewards) {
      total += scale * r;
      scale *= discount;
    }
    return total;
  }

  bool consistent() const {
    const std::size_t t = actions.size();
    return states.size() == t + 1 && beliefs.size() == t + 1 && rewards.size() == t && log_probs.size() == t &&
           observations.size() == t && (latent_trace.empty() || latent_trace.size() == t + 1);
  }
};

namespace detail {

inline void write_vector_json(std::ostream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
}

inline std::vector<std::string> belief_column_names(const Belief& b) {
  std::vector<std::string> names;
  if (const auto* c = std::get_if<CategoricalBelief>(&b)) {
    for (Eigen::Index i = 0; i < c->weights.size(); ++i) names.push_back("b" + std::to_string(i));
  } else {
    const auto& g = std::get<GaussianBelief>(b);
    for (Eigen::Index i = 0; i < g.mean.size(); ++i) names.push_back("b_mean" + std::to_string(i));
    for (Eigen::Index i = 0; i < g.variance.size(); ++i) names.push_back("b_var" + std::to_string(i));
  }
  return names;
}

}  // namespace detail

/// One CSV per rollout. First line is a `# {json}` header with the latent
/// draw and seed; then columns t, s*, b*, a*, reward, log_prob. Row t holds
/// (s_t, b_t) and the action taken from it; the final row has empty action
/// fields. When a latent trace was recorded, trailing latent* columns hold the
/// true latent at each step (for plotting only).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& env_name) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  os << "# {\"env\":\"" << env_name << "\",\"seed\":" << traj.seed << ",\"latent\":";
  detail::write_vector_json(os, traj.latent);
  os << ",\"belief\":\"" << belief_kind(traj.beliefs.front()) << "\",\"steps\":" << traj.length() << "}\n";

  const Eigen::Index state_width = traj.states.front().size();
  const Eigen::Index action_width = traj.actions.empty() ? 0 : traj.actions.front().as_vector().size();
  os << 't';
  for (Eigen::Index i = 0; i < state_width; ++i) os << ",s" << i;
  for (const auto& name : detail::belief_column_names(traj.beliefs.front())) os << ',' << name;
  for (Eigen::Index i = 0; i < action_width; ++i) os << ",a" << i;
  os << ",reward,log_prob";
  const bool with_latent = traj.latent_trace.size() == traj.states.size();
  const Eigen::Index latent_width = with_latent ? traj.latent_trace.front().size() : 0;
  for (Eigen::Index i = 0; i < latent_width; ++i) os << ",latent" << i;
  os << '\n';

  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    os << t;
    for (double x : traj.states[t]) os << ',' << x;
    for (double x : belief_vector(traj.beliefs[t])) os << ',' << x;
    if (t < traj.length()) {
      for (double x : traj.actions[t].as_vector()) os << ',' << x;
      os << ',' << traj.rewards[t] << ',' << traj.log_probs[t];
    } else {
      for (Eigen::Index i = 0; i < action_width; ++i) os << ',';
      os << ",,";
    }
    if (with_latent)
      for (double x : traj.latent_trace[t]) os << ',' << x;
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace bpo
