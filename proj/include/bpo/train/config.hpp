#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>

#include "bpo/core/errors.hpp"
#include "bpo/envs/chain.hpp"
#include "bpo/envs/light_dark.hpp"
#include "bpo/envs/tiger.hpp"

namespace bpo {

enum class EnvId { kTiger, kChain, kLightDark };

/// bpo: separate state and belief encoders. bpo_minus: raw (s, b) into the
/// head. upmle: the belief is replaced by its (normalized) MLE. robust: the
/// policy sees only the observable state. nominal: state-only policy trained on
/// the prior-midpoint MDP.
enum class Algorithm { kBpo, kBpoMinus, kUpmle, kRobust, kNominal };

inline std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::kTiger: return "tiger";
    case EnvId::kChain: return "chain";
    case EnvId::kLightDark: return "light_dark";
  }
  return "?";
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBpo: return "bpo";
    case Algorithm::kBpoMinus: return "bpo_minus";
    case Algorithm::kUpmle: return "upmle";
    case Algorithm::kRobust: return "robust_ensemble";
    case Algorithm::kNominal: return "nominal";
  }
  return "?";
}

inline std::string to_string(ChainMode m) { return m == ChainMode::kTied ? "tied" : "semitied"; }

inline EnvId parse_env_id(const std::string& s) {
  if (s == "tiger") return EnvId::kTiger;
  if (s == "chain") return EnvId::kChain;
  if (s == "light_dark" || s == "lightdark") return EnvId::kLightDark;
  throw ConfigError("unknown environment '" + s + "'");
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "bpo") return Algorithm::kBpo;
  if (s == "bpo_minus" || s == "bpo-") return Algorithm::kBpoMinus;
  if (s == "upmle") return Algorithm::kUpmle;
  if (s == "robust_ensemble" || s == "robust") return Algorithm::kRobust;
  if (s == "nominal") return Algorithm::kNominal;
  throw ConfigError("unknown algorithm '" + s + "'");
}

inline ChainMode parse_chain_mode(const std::string& s) {
  if (s == "tied") return ChainMode::kTied;
  if (s == "semitied") return ChainMode::kSemitied;
  throw ConfigError("unknown chain mode '" + s + "'");
}

struct EnvConfig {
  EnvId id = EnvId::kTiger;
  double listen_accuracy = 0.85;
  ChainMode chain_mode = ChainMode::kTied;
  double noise_floor = 0.5;
  double action_bound = 1.0;
};

struct TrainConfig {
  EnvConfig env;
  Algorithm algorithm = Algorithm::kBpo;
  int horizon = 100;
  int batch_size = 500;  // environment steps per iteration
  int n_itr = 1000;
  double discount = 0.95;
  double step_size = 0.01;  // mean-KL trust region
  double gae_lambda = 0.96;
  int bins = 10;    // latent bins per continuous dimension
  int hidden = 32;  // N_h
  std::uint64_t seed = 1;
  int n_seeds = 5;
  int workers = 1;

  double cg_damping = 1e-3;
  int cg_iters = 10;
  double backtrack_ratio = 0.8;
  int max_backtracks = 15;
  int vf_epochs = 5;
  double vf_learning_rate = 1e-3;
  int vf_minibatch = 64;
  double policy_output_gain = 0.01;

  bool freeze_belief = false;
  bool strict_filter = false;

  int eval_episodes = 1000;
  std::uint64_t eval_seed = 20190506;

  int trajectories_per_iteration() const { return (batch_size + horizon - 1) / horizon; }

  /// Training parameters per environment (Tiger, Chain, Light-Dark).
  static TrainConfig defaults(EnvId id) {
    TrainConfig c;
    c.env.id = id;
    switch (id) {
      case EnvId::kTiger:
        c.horizon = 100, c.batch_size = 500, c.n_itr = 1000, c.discount = 0.95;
        break;
      case EnvId::kChain:
        c.horizon = 100, c.batch_size = 10000, c.n_itr = 500, c.discount = 1.0;
        break;
      case EnvId::kLightDark:
        c.horizon = 15, c.batch_size = 400, c.n_itr = 10000, c.discount = 1.0;
        break;
    }
    return c;
  }

  void validate() const {
    if (horizon < 1) throw ConfigError("train.horizon must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (n_itr < 0) throw ConfigError("train.n_itr must be >= 0");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("train.discount must lie in [0, 1]");
    if (!(step_size > 0.0)) throw ConfigError("trpo.step_size must be positive");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("trpo.gae_lambda must lie in [0, 1]");
    if (bins < 1) throw ConfigError("train.bins must be >= 1");
    if (hidden < 1) throw ConfigError("net.hidden must be >= 1");
    if (n_seeds < 1) throw ConfigError("train.n_seeds must be >= 1");
    if (workers < 1) throw ConfigError("train.workers must be >= 1");
    if (!(cg_damping >= 0.0)) throw ConfigError("trpo.cg_damping must be >= 0");
    if (cg_iters < 1) throw ConfigError("trpo.cg_iters must be >= 1");
    if (!(backtrack_ratio > 0.0 && backtrack_ratio < 1.0)) throw ConfigError("trpo.backtrack_ratio must lie in (0, 1)");
    if (max_backtracks < 1) throw ConfigError("trpo.max_backtracks must be >= 1");
    if (vf_epochs < 0) throw ConfigError("baseline.epochs must be >= 0");
    if (!(vf_learning_rate >= 0.0)) throw ConfigError("baseline.learning_rate must be >= 0");
    if (vf_minibatch < 1) throw ConfigError("baseline.minibatch must be >= 1");
    if (eval_episodes < 1) throw ConfigError("eval.episodes must be >= 1");
    if (env.id == EnvId::kTiger && !(env.listen_accuracy > 0.5 && env.listen_accuracy <= 1.0))
      throw ConfigError("env.listen_accuracy must lie in (0.5, 1]");
    if (env.id == EnvId::kLightDark && !(env.noise_floor > 0.0)) throw ConfigError("env.noise_floor must be positive");
    if (env.id == EnvId::kLightDark && !(env.action_bound > 0.0)) throw ConfigError("env.action_bound must be positive");
  }
};

inline std::unique_ptr<Environment> make_environment(const TrainConfig& c) {
  switch (c.env.id) {
    case EnvId::kTiger:
      return std::make_unique<TigerEnv>(TigerParams{c.env.listen_accuracy, c.discount, c.horizon});
    case EnvId::kChain:
      return std::make_unique<ChainEnv>(ChainParams{c.env.chain_mode, c.discount, c.horizon});
    case EnvId::kLightDark: {
      LightDarkParams p;
      p.noise_floor = c.env.noise_floor;
      p.action_bound = c.env.action_bound;
      p.discount = c.discount;
      p.horizon = c.horizon;
      return std::make_unique<LightDarkEnv>(p);
    }
  }
  throw ConfigError("unknown environment");
}

}  // namespace bpo
