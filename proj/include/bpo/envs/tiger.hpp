#pragma once

#include <memory>

#include "bpo/core/environment.hpp"
#include "bpo/filters/bayes_filter.hpp"
#include "bpo/filters/categorical.hpp"

namespace bpo {

// Classic Tiger: the latent is the tiger's side. The observable "state" is the
// one-hot of the most recent observation so that belief-free baselines still
// see what was just heard.

enum class TigerAction : int { kListen = 0, kOpenLeft = 1, kOpenRight = 2 };
enum class TigerObservation : int { kNone = 0, kHearLeft = 1, kHearRight = 2 };

inline constexpr double kTigerLeft = 0.0;
inline constexpr double kTigerRight = 1.0;

struct TigerParams {
  double listen_accuracy = 0.85;
  double discount = 0.95;
  int horizon = 100;
};

struct TigerStep {
  double reward = 0.0;
  TigerObservation observation = TigerObservation::kNone;
  double next_side = kTigerLeft;
};

inline Eigen::VectorXd tiger_state(TigerObservation obs) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
  s[static_cast<int>(obs)] = 1.0;
  return s;
}

/// Evidence encoding of an observation: its code as a 1-vector.
inline Eigen::VectorXd tiger_observation(TigerObservation obs) {
  return Eigen::VectorXd::Constant(1, static_cast<double>(obs));
}

/// One Tiger transition. Opening a door resamples the tiger's side.
inline TigerStep tiger_step(double tiger_side, TigerAction action, double listen_accuracy, Rng& rng) {
  TigerStep out;
  if (action == TigerAction::kListen) {
    out.reward = -1.0;
    const bool correct = uniform01(rng) < listen_accuracy;
    const bool hear_left = (tiger_side == kTigerLeft) == correct;
    out.observation = hear_left ? TigerObservation::kHearLeft : TigerObservation::kHearRight;
    out.next_side = tiger_side;
    return out;
  }
  const double opened = action == TigerAction::kOpenLeft ? kTigerLeft : kTigerRight;
  out.reward = opened == tiger_side ? -100.0 : 10.0;
  out.observation = TigerObservation::kNone;
  out.next_side = uniform01(rng) < 0.5 ? kTigerLeft : kTigerRight;
  return out;
}

/// P(observation | tiger side, action). Door openings are uninformative.
inline double tiger_likelihood(double tiger_side, TigerAction action, TigerObservation obs, double listen_accuracy) {
  if (action != TigerAction::kListen) return 1.0;
  if (obs == TigerObservation::kNone) return 0.0;
  const bool matches = (obs == TigerObservation::kHearLeft) == (tiger_side == kTigerLeft);
  return matches ? listen_accuracy : 1.0 - listen_accuracy;
}

inline BamdpSpec tiger_spec(const TigerParams& p) {
  BamdpSpec spec;
  spec.name = "tiger";
  spec.state_dim = 3;
  spec.action_space = DiscreteActions{3};
  spec.latent_prior = {LatentSupport{{kTigerLeft, kTigerRight}}};
  spec.discount = p.discount;
  spec.horizon = p.horizon;
  spec.validate();
  if (!(p.listen_accuracy > 0.5 && p.listen_accuracy <= 1.0))
    throw ConfigError("tiger: listen_accuracy must lie in (0.5, 1]");
  return spec;
}

/// Categorical filter over {left, right}; resets to uniform after a door opens.
class TigerFilter final : public BayesFilter {
 public:
  explicit TigerFilter(const BamdpSpec& spec, double listen_accuracy)
      : grid_(spec.latent_prior, 1), accuracy_(listen_accuracy) {}

  Belief initial_belief() const override { return uniform_belief(static_cast<Eigen::Index>(grid_.size())); }

  Belief update(const Belief& belief, const Evidence& ev) const override {
    const auto action = static_cast<TigerAction>(ev.action.index);
    if (action != TigerAction::kListen) return initial_belief();
    const auto obs = static_cast<TigerObservation>(static_cast<int>(ev.observation[0]));
    return categorical_update(std::get<CategoricalBelief>(belief), grid_, [&](const LatentVector& phi) {
      return tiger_likelihood(phi[0], action, obs, accuracy_);
    });
  }

  const LatentGrid& grid() const override { return grid_; }

 private:
  LatentGrid grid_;
  double accuracy_;
};

class TigerEnv final : public Environment {
 public:
  explicit TigerEnv(TigerParams params = {}) : params_(params), spec_(tiger_spec(params)) {}

  const BamdpSpec& spec() const override { return spec_; }
  const TigerParams& params() const { return params_; }

  Eigen::VectorXd reset(const LatentVector& latent, Rng&) override {
    side_ = latent[0];
    return tiger_state(TigerObservation::kNone);
  }

  StepOutcome step(const Action& action, Rng& rng) override {
    if (action.index < 0 || action.index > 2) throw ConfigError("tiger: invalid action");
    const auto a = static_cast<TigerAction>(action.index);
    const TigerStep s = tiger_step(side_, a, params_.listen_accuracy, rng);
    side_ = s.next_side;
    StepOutcome out;
    out.reward = s.reward;
    out.next_state = tiger_state(s.observation);
    out.evidence.observation = tiger_observation(s.observation);
    return out;
  }

  LatentVector true_latent() const override { return LatentVector::Constant(1, side_); }

  std::unique_ptr<BayesFilter> make_filter(int) const override {
    return std::make_unique<TigerFilter>(spec_, params_.listen_accuracy);
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<TigerEnv>(*this); }

 private:
  TigerParams params_;
  BamdpSpec spec_;
  double side_ = kTigerLeft;
};

}  // namespace bpo
