#pragma once

#include <memory>

#include "bpo/core/environment.hpp"
#include "bpo/filters/bayes_filter.hpp"
#include "bpo/filters/categorical.hpp"

namespace bpo {

// Five-state Chain with a latent slip probability. States are 0-based
// internally (0 == s1, 4 == s5). Action A advances, action B returns to s1.

enum class ChainAction : int { kA = 0, kB = 1 };
enum class ChainMode { kTied, kSemitied };

inline constexpr int kChainStates = 5;

struct ChainParams {
  ChainMode mode = ChainMode::kTied;
  double discount = 1.0;
  int horizon = 100;
};

struct ChainTransition {
  double reward = 0.0;
  int next_state = 0;
};

/// Deterministic outcome of an executed (post-slip) action.
inline ChainTransition chain_outcome(int state, ChainAction executed) {
  if (executed == ChainAction::kB) return {2.0, 0};
  if (state == kChainStates - 1) return {10.0, state};
  return {0.0, state + 1};
}

inline ChainAction chain_opposite(ChainAction a) { return a == ChainAction::kA ? ChainAction::kB : ChainAction::kA; }

/// Slip probability of the intended action. Tied latents have one entry.
inline double chain_slip(const LatentVector& phi, ChainAction intended) {
  return phi.size() == 1 ? phi[0] : phi[static_cast<int>(intended)];
}

/// One Chain step: the intended action is replaced by the opposite one with
/// its slip probability.
inline ChainTransition chain_step(int state, ChainAction intended, const LatentVector& phi, Rng& rng) {
  const bool slipped = uniform01(rng) < chain_slip(phi, intended);
  return chain_outcome(state, slipped ? chain_opposite(intended) : intended);
}

/// P(s' | s, intended action, phi). The intended and opposite outcomes differ
/// from every state, so next-state alone identifies the executed action.
inline double chain_likelihood(const LatentVector& phi, int state, ChainAction intended, int next_state) {
  const double slip = chain_slip(phi, intended);
  if (chain_outcome(state, intended).next_state == next_state) return 1.0 - slip;
  if (chain_outcome(state, chain_opposite(intended)).next_state == next_state) return slip;
  return 0.0;
}

inline Eigen::VectorXd chain_state(int index) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(kChainStates);
  s[index] = 1.0;
  return s;
}

inline int chain_state_index(const Eigen::VectorXd& s) {
  Eigen::Index i = 0;
  s.maxCoeff(&i);
  return static_cast<int>(i);
}

inline BamdpSpec chain_spec(const ChainParams& p) {
  BamdpSpec spec;
  spec.name = p.mode == ChainMode::kTied ? "chain_tied" : "chain_semitied";
  spec.state_dim = kChainStates;
  spec.action_space = DiscreteActions{2};
  spec.latent_prior.assign(p.mode == ChainMode::kTied ? 1 : 2, LatentRange{0.0, 1.0});
  spec.discount = p.discount;
  spec.horizon = p.horizon;
  spec.validate();
  return spec;
}

class ChainFilter final : public BayesFilter {
 public:
  ChainFilter(const BamdpSpec& spec, int bins) : grid_(spec.latent_prior, bins) {}

  Belief initial_belief() const override { return uniform_belief(static_cast<Eigen::Index>(grid_.size())); }

  Belief update(const Belief& belief, const Evidence& ev) const override {
    const int s = chain_state_index(ev.state);
    const int s_next = chain_state_index(ev.next_state);
    const auto a = static_cast<ChainAction>(ev.action.index);
    return categorical_update(std::get<CategoricalBelief>(belief), grid_,
                              [&](const LatentVector& phi) { return chain_likelihood(phi, s, a, s_next); });
  }

  const LatentGrid& grid() const override { return grid_; }

 private:
  LatentGrid grid_;
};

class ChainEnv final : public Environment {
 public:
  explicit ChainEnv(ChainParams params = {}) : params_(params), spec_(chain_spec(params)) {}

  const BamdpSpec& spec() const override { return spec_; }

  Eigen::VectorXd reset(const LatentVector& latent, Rng&) override {
    phi_ = latent;
    state_ = 0;
    return chain_state(state_);
  }

  StepOutcome step(const Action& action, Rng& rng) override {
    if (action.index < 0 || action.index > 1) throw ConfigError("chain: invalid action");
    const ChainTransition tr = chain_step(state_, static_cast<ChainAction>(action.index), phi_, rng);
    state_ = tr.next_state;
    StepOutcome out;
    out.reward = tr.reward;
    out.next_state = chain_state(state_);
    return out;
  }

  LatentVector true_latent() const override { return phi_; }

  std::unique_ptr<BayesFilter> make_filter(int bins) const override {
    return std::make_unique<ChainFilter>(spec_, bins);
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<ChainEnv>(*this); }

 private:
  ChainParams params_;
  BamdpSpec spec_;
  LatentVector phi_ = LatentVector::Zero(1);
  int state_ = 0;
};

}  // namespace bpo
