#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// runner. Each returns ok plus a short description of the worst case seen.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bpo/envs/chain.hpp"
#include "bpo/envs/light_dark.hpp"
#include "bpo/envs/tiger.hpp"
#include "bpo/filters/estimates.hpp"
#include "bpo/train/trainer.hpp"
#include "bpo/trpo/trpo_step.hpp"

namespace bpo::testing {

struct PropertyResult {
  bool ok = true;
  std::string detail;
};

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

/// |a - b| / max(|a|, |b|, floor): relative error, with an absolute floor for
/// coordinates that are numerically zero.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Every (environment, algorithm) pair the experiments train.
inline std::vector<TrainConfig> experiment_configs() {
  std::vector<TrainConfig> out;
  for (EnvId id : {EnvId::kTiger, EnvId::kChain, EnvId::kLightDark}) {
    for (Algorithm a :
         {Algorithm::kBpo, Algorithm::kBpoMinus, Algorithm::kUpmle, Algorithm::kRobust, Algorithm::kNominal}) {
      TrainConfig c = TrainConfig::defaults(id);
      c.algorithm = a;
      out.push_back(c);
      if (id == EnvId::kChain) {
        c.env.chain_mode = ChainMode::kSemitied;
        out.push_back(c);
      }
    }
  }
  return out;
}

inline std::string describe(const TrainConfig& c) {
  return to_string(c.env.id) + (c.env.id == EnvId::kChain ? "/" + to_string(c.env.chain_mode) : "") + "/" +
         to_string(c.algorithm);
}

/// A small on-policy batch with random advantages, collected by `theta`.
inline trpo::TrainingBatch random_batch(const Agent& agent, const Vector& theta, std::uint64_t seed, int episodes,
                                        bool zero_advantages = false) {
  RolloutSet set = collect_rollouts(agent, theta, seed, 0, episodes, 1);
  trpo::TrainingBatch batch = assemble_batch(agent, set.trajectories);
  Rng rng = make_stream(seed, 99, 0);
  std::normal_distribution<double> n01;
  batch.policy.advantages = Vector::Zero(batch.policy.states.cols());
  if (!zero_advantages)
    for (Index i = 0; i < batch.policy.advantages.size(); ++i) batch.policy.advantages[i] = n01(rng);
  return batch;
}

/// Parameters perturbed away from the (near-uniform) initialization so the
/// checks see non-trivial policies.
inline Vector random_params(const net::Policy& policy, std::uint64_t seed, double scale = 0.3) {
  Rng rng = make_stream(seed, kInitStream, 7);
  Vector theta = policy.init_params(rng);
  std::normal_distribution<double> n01;
  for (Index i = 0; i < theta.size(); ++i) theta[i] += scale * n01(rng);
  return theta;
}

// ---------------------------------------------------------------------------
// Filters

/// Iterated categorical updates stay normalized and agree with the one-shot
/// posterior from the product of all likelihoods.
inline PropertyResult check_sequential_batch_bayes(int trials = 200) {
  PropertyResult r;
  double worst = 0.0, worst_norm = 0.0;
  Rng rng(12345);
  const ChainParams cp{ChainMode::kSemitied, 1.0, 100};
  const BamdpSpec chain = chain_spec(cp);
  const ChainFilter chain_filter(chain, 6);
  const TigerParams tp;
  const TigerFilter tiger_filter(tiger_spec(tp), tp.listen_accuracy);
  for (int trial = 0; trial < trials; ++trial) {
    // Chain: random latent, random intended actions.
    const LatentVector phi = sample_latent_mdp(chain, rng);
    Belief b = chain_filter.initial_belief();
    Eigen::VectorXd product = Eigen::VectorXd::Ones(static_cast<Index>(chain_filter.grid().size()));
    int s = 0;
    for (int t = 0; t < 20; ++t) {
      const auto a = uniform01(rng) < 0.5 ? ChainAction::kA : ChainAction::kB;
      const int s_next = chain_step(s, a, phi, rng).next_state;
      b = chain_filter.update(b, {chain_state(s), Action::discrete(static_cast<int>(a)), chain_state(s_next), {}});
      for (std::size_t i = 0; i < chain_filter.grid().size(); ++i)
        product[static_cast<Index>(i)] *= chain_likelihood(chain_filter.grid().center(i), s, a, s_next);
      const auto& w = std::get<CategoricalBelief>(b).weights;
      worst_norm = std::max(worst_norm, std::abs(w.sum() - 1.0));
      if ((w.array() < 0.0).any()) r.ok = false;
      s = s_next;
    }
    const Eigen::VectorXd batch = product / product.sum();
    worst = std::max(worst, (std::get<CategoricalBelief>(b).weights - batch).cwiseAbs().maxCoeff());

    // Tiger: listen-only sequences (the belief resets on open).
    const double side = uniform01(rng) < 0.5 ? kTigerLeft : kTigerRight;
    Belief tb = tiger_filter.initial_belief();
    Eigen::Vector2d tprod(1.0, 1.0);
    for (int t = 0; t < 15; ++t) {
      const TigerStep st = tiger_step(side, TigerAction::kListen, tp.listen_accuracy, rng);
      Evidence ev{tiger_state(TigerObservation::kNone), Action::discrete(0), tiger_state(st.observation),
                  tiger_observation(st.observation)};
      tb = tiger_filter.update(tb, ev);
      tprod[0] *= tiger_likelihood(kTigerLeft, TigerAction::kListen, st.observation, tp.listen_accuracy);
      tprod[1] *= tiger_likelihood(kTigerRight, TigerAction::kListen, st.observation, tp.listen_accuracy);
      worst_norm = std::max(worst_norm, std::abs(std::get<CategoricalBelief>(tb).weights.sum() - 1.0));
    }
    worst = std::max(worst, (std::get<CategoricalBelief>(tb).weights - tprod / tprod.sum()).cwiseAbs().maxCoeff());
  }
  r.ok = r.ok && worst <= 1e-9 && worst_norm <= 1e-9;
  r.detail = "max |sequential - batch| = " + fmt(worst) + ", max |sum - 1| = " + fmt(worst_norm);
  return r;
}

/// Tiger listen: sum_o P(o|b) H(b'_o) <= H(b) for beliefs across [0, 1].
inline PropertyResult check_tiger_expected_entropy() {
  PropertyResult r;
  const double acc = 0.85;
  const TigerParams tp;
  const TigerFilter filter(tiger_spec(tp), acc);
  double worst = -1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    const Belief b = CategoricalBelief{Eigen::Vector2d(p, 1.0 - p)};
    double expected = 0.0;
    for (TigerObservation o : {TigerObservation::kHearLeft, TigerObservation::kHearRight}) {
      const double po = p * tiger_likelihood(kTigerLeft, TigerAction::kListen, o, acc) +
                        (1.0 - p) * tiger_likelihood(kTigerRight, TigerAction::kListen, o, acc);
      if (po == 0.0) continue;
      const Belief post = filter.update(b, {tiger_state(TigerObservation::kNone), Action::discrete(0),
                                            tiger_state(o), tiger_observation(o)});
      expected += po * belief_entropy(post);
    }
    worst = std::max(worst, expected - belief_entropy(b));
  }
  r.ok = worst <= 1e-12;
  r.detail = "max E[H(b')] - H(b) = " + fmt(worst);
  return r;
}

/// Scalar EKF correction equals the product-of-Gaussians posterior and contracts.
inline PropertyResult check_ekf_closed_form(int trials = 1000) {
  PropertyResult r;
  Rng rng(777);
  std::uniform_real_distribution<double> mu(-5.0, 5.0), var(0.05, 10.0);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double m = mu(rng), v = var(rng), vo = var(rng), o = mu(rng), a = mu(rng);
    const GaussianBelief prior{Eigen::VectorXd::Constant(1, m), Eigen::VectorXd::Constant(1, v)};
    const GaussianBelief post = ekf_update(
        prior, Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, o),
        [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd { return x + u; },
        [vo](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(x.size(), vo); });
    // Product of N(m + a, v) and N(o, vo).
    const double v_ref = v * vo / (v + vo);
    const double m_ref = ((m + a) * vo + o * v) / (v + vo);
    worst = std::max({worst, rel_error(post.variance[0], v_ref, 1.0), rel_error(post.mean[0], m_ref, 1.0)});
    if (!(post.variance[0] < v)) r.ok = false;
  }
  r.ok = r.ok && worst <= 1e-12;
  r.detail = "max closed-form deviation = " + fmt(worst);
  return r;
}

// ---------------------------------------------------------------------------
// Networks

/// Reverse-mode gradient of sum(U .* out) against central differences.
/// Central differences at h = 1e-5 carry ~1e-10 absolute roundoff on an O(1)
/// loss, so coordinates smaller than this are compared absolutely.
inline constexpr double kGradientFloor = 1e-4;

inline double gradient_check(const net::DualEncoderNet& net, std::uint64_t seed, double h = 1e-5) {
  Rng rng(seed);
  std::normal_distribution<double> n01;
  Vector theta = Vector::Zero(net.num_params());
  net.init(theta, rng);
  for (Index i = 0; i < theta.size(); ++i) theta[i] += 0.3 * n01(rng);
  const Index n = 3;
  Matrix s(net.config().state_dim, n), b(net.config().belief_dim, n), u(net.config().output_dim, n);
  for (Index i = 0; i < s.size(); ++i) s.data()[i] = n01(rng);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = n01(rng);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = n01(rng);
  net::DualEncoderNet::Cache cache;
  net.forward(theta, s, b, cache);
  Vector grad = Vector::Zero(theta.size());
  net.backward(theta, cache, u, grad);
  const auto loss = [&](const Vector& t) { return (u.array() * net.forward(t, s, b).array()).sum(); };
  double worst = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const double fd = (loss(tp) - loss(tm)) / (2.0 * h);
    worst = std::max(worst, rel_error(grad[i], fd, kGradientFloor));
  }
  return worst;
}

inline PropertyResult check_network_gradients() {
  PropertyResult r;
  double worst = 0.0;
  std::string where;
  std::uint64_t seed = 1;
  for (const TrainConfig& c : experiment_configs()) {
    const Agent agent(c);
    for (const auto& cfg : {agent.policy().network().config(), agent.value_config()}) {
      const double e = gradient_check(net::DualEncoderNet(cfg), seed++);
      if (e > worst) worst = e, where = describe(c);
    }
  }
  r.ok = worst < 1e-5;
  r.detail = "max relative error " + fmt(worst) + " (" + where + ")";
  return r;
}

// ---------------------------------------------------------------------------
// Trust region

inline PropertyResult check_fisher_vector_product() {
  PropertyResult r;
  double worst_sym = 0.0, worst_psd = 0.0, worst_fd = 0.0;
  std::uint64_t seed = 100;
  for (EnvId id : {EnvId::kTiger, EnvId::kChain, EnvId::kLightDark}) {
    TrainConfig c = TrainConfig::defaults(id);
    c.hidden = 8;
    c.horizon = std::min(c.horizon, 10);
    const Agent agent(c);
    const Vector theta = random_params(agent.policy(), seed);
    const trpo::TrainingBatch batch = random_batch(agent, theta, seed++, 3);
    const trpo::PolicyObjective obj(agent.policy(), batch.policy, theta);
    Rng rng(seed);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 3; ++k) {
      Vector u(theta.size()), v(theta.size());
      for (Index i = 0; i < theta.size(); ++i) u[i] = n01(rng), v[i] = n01(rng);
      const Vector fu = obj.fisher_vector_product(u, 0.0), fv = obj.fisher_vector_product(v, 0.0);
      worst_sym = std::max(worst_sym, std::abs(u.dot(fv) - v.dot(fu)));
      worst_psd = std::min(worst_psd, v.dot(fv));
      // Hessian-vector product of the mean KL by central differences of its gradient.
      const double h = 1e-5;
      const Vector fd = (obj.kl_gradient(theta + h * v) - obj.kl_gradient(theta - h * v)) / (2.0 * h);
      worst_fd = std::max(worst_fd, (fd - fv).norm() / std::max(fv.norm(), 1e-12));
    }
  }
  r.ok = worst_sym <= 1e-8 && worst_psd >= -1e-10 && worst_fd <= 1e-4;
  r.detail = "asymmetry " + fmt(worst_sym) + ", min v.Fv " + fmt(worst_psd) + ", finite-difference error " +
             fmt(worst_fd);
  return r;
}

inline PropertyResult check_conjugate_gradient(int trials = 100) {
  PropertyResult r;
  Rng rng(2024);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Matrix m(5, 5);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
    const Matrix a = m * m.transpose() + 0.5 * Matrix::Identity(5, 5);
    Vector b(5);
    for (Index i = 0; i < 5; ++i) b[i] = n01(rng);
    const Vector x = trpo::conjugate_gradient([&](const Vector& p) -> Vector { return a * p; }, b, 5, 1e-30);
    worst = std::max(worst, (a * x - b).norm() / b.norm());
  }
  r.ok = worst < 1e-8;
  r.detail = "max relative residual after 5 iterations " + fmt(worst);
  return r;
}

/// Every accepted step of the full TRPO update respects the trust region and
/// improves the surrogate.
inline PropertyResult check_trust_region_steps(int trials_per_env = 6) {
  PropertyResult r;
  int accepted = 0, total = 0;
  double worst_kl = 0.0, worst_improvement = 1e300;
  std::uint64_t seed = 500;
  for (EnvId id : {EnvId::kTiger, EnvId::kChain, EnvId::kLightDark}) {
    TrainConfig c = TrainConfig::defaults(id);
    c.hidden = 16;
    const Agent agent(c);
    const trpo::TrpoOptions opt = trpo_options(c);
    for (int k = 0; k < trials_per_env; ++k, ++seed) {
      const Vector theta = random_params(agent.policy(), seed, 0.1);
      const trpo::TrainingBatch batch = random_batch(agent, theta, seed, 4);
      const trpo::PolicyObjective obj(agent.policy(), batch.policy, theta);
      const Vector step = trpo::scaled_natural_step(obj, obj.surrogate_gradient(), opt);
      const auto ls = trpo::line_search(
          theta, step, [&](const Vector& p) { return obj.evaluate(p); }, opt.max_kl, opt.backtrack_ratio,
          opt.max_backtracks);
      ++total;
      if (!ls.accepted) continue;
      ++accepted;
      const double kl = obj.mean_kl(ls.params);
      const double improvement = obj.surrogate(ls.params) - obj.old_surrogate();
      worst_kl = std::max(worst_kl, kl);
      worst_improvement = std::min(worst_improvement, improvement);
    }
  }
  r.ok = accepted > 0 && worst_kl <= 0.01 + 1e-8 && worst_improvement > 0.0;
  r.detail = std::to_string(accepted) + "/" + std::to_string(total) + " accepted, max KL " + fmt(worst_kl) +
             ", min improvement " + fmt(worst_improvement);
  return r;
}

// ---------------------------------------------------------------------------
// Reproducibility

inline bool same_trajectory(const Trajectory& a, const Trajectory& b) {
  if (a.length() != b.length() || a.seed != b.seed || a.latent != b.latent) return false;
  for (std::size_t t = 0; t < a.states.size(); ++t) {
    if (a.states[t] != b.states[t] || belief_vector(a.beliefs[t]) != belief_vector(b.beliefs[t])) return false;
  }
  for (std::size_t t = 0; t < a.length(); ++t) {
    if (a.actions[t].index != b.actions[t].index || a.actions[t].value != b.actions[t].value ||
        a.rewards[t] != b.rewards[t] || a.log_probs[t] != b.log_probs[t])
      return false;
  }
  return true;
}

/// Diagnostics CSV with the wallclock column removed.
inline std::string strip_wallclock(const std::string& csv) {
  std::istringstream is(csv);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) os << line.substr(0, line.rfind(',')) << '\n';
  return os.str();
}

inline PropertyResult check_reproducibility() {
  PropertyResult r;
  std::vector<std::string> failures;
  for (EnvId id : {EnvId::kTiger, EnvId::kChain, EnvId::kLightDark}) {
    TrainConfig c = TrainConfig::defaults(id);
    c.n_itr = 3;
    c.batch_size = std::min(c.batch_size, 300);
    c.hidden = 16;
    const Agent agent(c);
    Rng init = make_stream(c.seed, kInitStream, 0);
    const Vector theta = agent.policy().init_params(init);
    const RolloutSet one = collect_rollouts(agent, theta, 42, 3, 6, 1);
    const RolloutSet again = collect_rollouts(agent, theta, 42, 3, 6, 1);
    const RolloutSet parallel = collect_rollouts(agent, theta, 42, 3, 6, 3);
    for (std::size_t i = 0; i < one.trajectories.size(); ++i) {
      if (!same_trajectory(one.trajectories[i], again.trajectories[i]) ||
          !same_trajectory(one.trajectories[i], parallel.trajectories[i])) {
        failures.push_back(to_string(id) + " trajectories");
        break;
      }
    }
    std::ostringstream a, b;
    Trainer(c).run(&a);
    c.workers = 2;
    Trainer(c).run(&b);
    if (strip_wallclock(a.str()) != strip_wallclock(b.str())) failures.push_back(to_string(id) + " diagnostics");
  }
  r.ok = failures.empty();
  r.detail = r.ok ? "trajectories and diagnostics identical across runs and worker counts" : "mismatch:";
  for (const auto& f : failures) r.detail += " " + f;
  return r;
}

struct NamedProperty {
  const char* name;
  PropertyResult (*check)();
};

inline const std::vector<NamedProperty>& all_properties() {
  static const std::vector<NamedProperty> props = {
      {"filter normalization and sequential/batch Bayes equivalence", [] { return check_sequential_batch_bayes(); }},
      {"expected entropy decrease under Tiger listen", [] { return check_tiger_expected_entropy(); }},
      {"EKF agrees with product of Gaussians", [] { return check_ekf_closed_form(); }},
      {"network gradients match central differences", [] { return check_network_gradients(); }},
      {"Fisher-vector product symmetric, PSD, matches finite differences", [] { return check_fisher_vector_product(); }},
      {"conjugate gradient residuals on random SPD systems", [] { return check_conjugate_gradient(); }},
      {"accepted trust-region steps respect KL and improve the surrogate", [] { return check_trust_region_steps(); }},
      {"seeded reproducibility of trajectories and diagnostics", [] { return check_reproducibility(); }},
  };
  return props;
}

}  // namespace bpo::testing
