#pragma once

#include <memory>
#include <optional>

#include "bpo/core/environment.hpp"
#include "bpo/filters/bayes_filter.hpp"
#include "bpo/filters/ekf.hpp"

namespace bpo {

// Light-Dark navigation. The agent's position is latent and observed through
// Gaussian noise whose variance w(x) = (x - light)^2 / 2 + c is smallest on the
// light line. The goal is observable and forms the state vector.

struct Rect {
  double x_lo, x_hi, y_lo, y_hi;
};

struct LightDarkParams {
  double noise_floor = 0.5;  // c in w(x)
  double light_x = 5.0;
  double action_bound = 1.0;  // per-component clip on actions
  double terminal_penalty = 5000.0;
  Rect start_region{2.0, 4.0, -2.0, 4.0};
  Rect goal_region{0.0, 2.0, -2.0, 4.0};
  Eigen::Vector2d initial_mean{2.0, 2.0};
  double initial_variance = 2.25;
  double discount = 1.0;
  int horizon = 15;
};

inline double light_dark_noise(double x, const LightDarkParams& p) {
  const double dx = x - p.light_x;
  return 0.5 * dx * dx + p.noise_floor;
}

inline Eigen::VectorXd clip_action(const Eigen::VectorXd& a, double bound) {
  return a.cwiseMax(-bound).cwiseMin(bound);
}

inline double light_dark_reward(const Eigen::VectorXd& position, const Eigen::VectorXd& goal,
                                const Eigen::VectorXd& applied_action) {
  return -0.5 * ((position - goal).squaredNorm() + applied_action.squaredNorm());
}

struct LightDarkStep {
  double reward = 0.0;
  Eigen::VectorXd observation;
  Eigen::VectorXd next_position;
};

/// One step: s' = s + clip(a), o ~ N(s', w(s'_x) I). `final_step` adds the
/// terminal miss penalty on s'.
inline LightDarkStep lightdark_step(const Eigen::VectorXd& position, const Eigen::VectorXd& action,
                                    const Eigen::VectorXd& goal, bool final_step, const LightDarkParams& p,
                                    Rng& rng) {
  const Eigen::VectorXd applied = clip_action(action, p.action_bound);
  LightDarkStep out;
  out.reward = light_dark_reward(position, goal, applied);
  out.next_position = position + applied;
  const double sd = std::sqrt(light_dark_noise(out.next_position[0], p));
  std::normal_distribution<double> noise(0.0, sd);
  out.observation = out.next_position;
  for (Eigen::Index d = 0; d < out.observation.size(); ++d) out.observation[d] += noise(rng);
  if (final_step) out.reward -= p.terminal_penalty * (out.next_position - goal).squaredNorm();
  return out;
}

inline BamdpSpec light_dark_spec(const LightDarkParams& p) {
  BamdpSpec spec;
  spec.name = "light_dark";
  spec.state_dim = 2;
  spec.action_space = ContinuousActions{2, p.action_bound};
  spec.latent_prior = {LatentRange{p.start_region.x_lo, p.start_region.x_hi},
                       LatentRange{p.start_region.y_lo, p.start_region.y_hi}};
  spec.discount = p.discount;
  spec.horizon = p.horizon;
  spec.validate();
  if (!(p.noise_floor > 0.0)) throw ConfigError("light_dark: noise_floor must be positive");
  if (!(p.action_bound > 0.0)) throw ConfigError("light_dark: action_bound must be positive");
  if (!(p.initial_variance > 0.0)) throw ConfigError("light_dark: initial_variance must be positive");
  return spec;
}

class LightDarkFilter final : public BayesFilter {
 public:
  explicit LightDarkFilter(const LightDarkParams& p) : params_(p) {}

  Belief initial_belief() const override {
    return GaussianBelief{params_.initial_mean, Eigen::VectorXd::Constant(2, params_.initial_variance)};
  }

  Belief update(const Belief& belief, const Evidence& ev) const override {
    const Eigen::VectorXd applied = clip_action(ev.action.value, params_.action_bound);
    return ekf_update(
        std::get<GaussianBelief>(belief), applied, ev.observation,
        [](const Eigen::VectorXd& mean, const Eigen::VectorXd& a) -> Eigen::VectorXd { return mean + a; },
        [this](const Eigen::VectorXd& predicted) -> Eigen::VectorXd {
          return Eigen::VectorXd::Constant(predicted.size(), light_dark_noise(predicted[0], params_));
        });
  }

  const LatentGrid& grid() const override { return grid_; }

 private:
  LightDarkParams params_;
  LatentGrid grid_;
};

class LightDarkEnv final : public Environment {
 public:
  explicit LightDarkEnv(LightDarkParams params = {}) : params_(params), spec_(light_dark_spec(params)) {}

  const BamdpSpec& spec() const override { return spec_; }
  const LightDarkParams& params() const { return params_; }

  /// Latent = start position. The goal is drawn here from the goal region
  /// unless one is pinned.
  Eigen::VectorXd reset(const LatentVector& latent, Rng& rng) override {
    position_ = latent;
    const Rect& g = params_.goal_region;
    goal_ = Eigen::Vector2d(std::uniform_real_distribution<double>(g.x_lo, g.x_hi)(rng),
                            std::uniform_real_distribution<double>(g.y_lo, g.y_hi)(rng));
    if (pinned_goal_) goal_ = *pinned_goal_;
    t_ = 0;
    return goal_;
  }

  void pin_goal(std::optional<Eigen::Vector2d> goal) { pinned_goal_ = std::move(goal); }

  StepOutcome step(const Action& action, Rng& rng) override {
    if (action.value.size() != 2) throw ConfigError("light_dark: action must be 2-dimensional");
    ++t_;
    const LightDarkStep s = lightdark_step(position_, action.value, goal_, t_ == spec_.horizon, params_, rng);
    position_ = s.next_position;
    StepOutcome out;
    out.reward = s.reward;
    out.next_state = goal_;
    out.evidence.observation = s.observation;
    return out;
  }

  LatentVector true_latent() const override { return position_; }
  const Eigen::VectorXd& goal() const { return goal_; }

  std::unique_ptr<BayesFilter> make_filter(int) const override { return std::make_unique<LightDarkFilter>(params_); }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<LightDarkEnv>(*this); }

 private:
  LightDarkParams params_;
  BamdpSpec spec_;
  Eigen::VectorXd position_ = Eigen::Vector2d::Zero();
  Eigen::VectorXd goal_ = Eigen::Vector2d::Zero();
  int t_ = 0;
  std::optional<Eigen::Vector2d> pinned_goal_;
};

}  // namespace bpo
