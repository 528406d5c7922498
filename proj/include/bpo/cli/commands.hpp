#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bpo/cli/checkpoint.hpp"
#include "bpo/cli/config_file.hpp"
#include "bpo/cli/manifest.hpp"
#include "bpo/cli/plot.hpp"
#include "bpo/train/evaluate.hpp"
#include "bpo/train/sweep.hpp"
#include "bpo/train/tiger_oracle.hpp"

namespace bpo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kOutputDirEnv = "BPO_OUTPUT_DIR";

inline std::filesystem::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("bpo_runs");
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  bool quiet = false;

  std::filesystem::path output_dir() const {
    const std::filesystem::path dir = output.empty() ? default_output_dir() : std::filesystem::path(output);
    std::filesystem::create_directories(dir);
    return dir;
  }
};

namespace detail {

inline std::vector<double> parse_vector(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& cell : split_csv_line(s)) {
    double x = 0.0;
    if (!cli::detail::parse_double(cli::detail::trim(cell), x)) throw ConfigError(what + ": cannot parse '" + s + "'");
    out.push_back(x);
  }
  return out;
}

inline Trainer::Progress progress_printer(const TrainConfig& c, bool quiet) {
  if (quiet) return {};
  const int every = std::max(1, c.n_itr / 20);
  return [&c, every](const IterationDiagnostics& d) {
    if (d.iteration % every != 0 && d.iteration + 1 != c.n_itr) return;
    std::cerr << "seed " << c.seed << " iter " << d.iteration + 1 << '/' << c.n_itr << " mean_return " << d.mean_return
              << " kl " << d.mean_kl << " entropy " << d.policy_entropy << " t " << d.wallclock << "s\n";
  };
}

inline std::vector<std::string> args_of(int argc, const char* const* argv) { return {argv, argv + argc}; }

/// Applies eval-time overrides to a checkpoint's config. Anything that would
/// change the architecture is rejected.
inline void apply_eval_overrides(TrainConfig& c, const std::vector<std::string>& overrides) {
  for (const auto& [k, v] : parse_overrides(overrides)) {
    const ConfigField& field = schema_field(k);
    if (k.rfind("eval.", 0) != 0 && k != "train.workers" && k != "train.strict_filter")
      throw ConfigError("config key '" + k + "' cannot be overridden for a trained checkpoint");
    field.set(c, v);
  }
  c.validate();
}

}  // namespace detail

inline int cmd_train(const CommonOptions& o, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  const TrainConfig config = load_any_config(o.config, o.overrides);
  const auto dir = o.output_dir();
  Manifest m;
  m.command = "train";
  m.argv = argv;
  m.config = config;

  const Agent agent(config);
  nlohmann::json per_seed = nlohmann::json::array();
  std::optional<Checkpoint> best;
  double best_eval = -std::numeric_limits<double>::infinity();
  std::string best_diag;
  for (int k = 0; k < config.n_seeds; ++k) {
    TrainConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(k);
    m.seeds.push_back(c.seed);
    const std::string diag_name = "diagnostics_seed" + std::to_string(c.seed) + ".csv";
    std::ofstream diag(dir / diag_name);
    if (!diag) throw std::runtime_error("cannot write " + (dir / diag_name).string());
    const TrainResult r = Trainer(c).run(&diag, detail::progress_printer(c, o.quiet));
    const EvalResult e = evaluate(agent, r.best_params, c.eval_episodes, c.eval_seed, c.workers);
    m.outputs.push_back(diag_name);
    per_seed.push_back({{"seed", c.seed},
                        {"best_iteration", r.best_iteration},
                        {"best_batch_return", r.best_mean_return},
                        {"eval_mean", e.mean},
                        {"eval_ci95", e.ci95},
                        {"zero_likelihood_updates", r.filter_stats.zero_likelihood}});
    if (!o.quiet) std::cerr << "seed " << c.seed << " eval " << e.mean << " +/- " << e.ci95 << '\n';
    if (!best || e.mean > best_eval) {
      best_eval = e.mean;
      best = Checkpoint{c, r.best_params, r.value.params(), r.value.shift(), r.value.scale(),
                        {{"seed", c.seed},
                         {"best_iteration", r.best_iteration},
                         {"eval_mean", e.mean},
                         {"eval_ci95", e.ci95},
                         {"eval_episodes", c.eval_episodes}}};
      best_diag = diag_name;
    }
  }
  save_checkpoint((dir / "checkpoint.json").string(), *best);
  std::filesystem::copy_file(dir / best_diag, dir / "diagnostics.csv",
                             std::filesystem::copy_options::overwrite_existing);
  m.outputs.insert(m.outputs.end(), {"checkpoint.json", "diagnostics.csv"});
  m.results = {{"per_seed", per_seed},
               {"best_seed", best->meta["seed"]},
               {"eval_mean", best->meta["eval_mean"]},
               {"eval_ci95", best->meta["eval_ci95"]}};
  m.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir / "manifest.json", m);
  std::cout << "best seed " << best->meta["seed"] << ": " << best->meta["eval_mean"].get<double>() << " +/- "
            << best->meta["eval_ci95"].get<double>() << " over " << config.eval_episodes << " episodes\n";
  return kExitOk;
}

inline int cmd_eval(const CommonOptions& o, const std::string& checkpoint, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  Checkpoint ck = load_checkpoint(checkpoint);
  detail::apply_eval_overrides(ck.config, o.overrides);
  const auto dir = o.output_dir();
  const EvalResult e = evaluate(ck.config, ck.policy);
  {
    std::ofstream os(dir / "eval.csv");
    if (!os) throw std::runtime_error("cannot write eval.csv");
    os.precision(std::numeric_limits<double>::max_digits10);
    os << "episode,return\n";
    for (std::size_t i = 0; i < e.returns.size(); ++i) os << i << ',' << e.returns[i] << '\n';
  }
  Manifest m;
  m.command = "eval";
  m.argv = argv;
  m.config = ck.config;
  m.seeds = {ck.config.eval_seed};
  m.results = {{"checkpoint", checkpoint}, {"mean", e.mean}, {"ci95", e.ci95}, {"ci_defined", e.ci_defined}};
  m.outputs = {"eval.csv"};
  m.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir / "eval_manifest.json", m);
  std::cout << e.mean << " +/- " << (e.ci_defined ? std::to_string(e.ci95) : std::string("undefined")) << " over "
            << e.returns.size() << " episodes\n";
  return kExitOk;
}

inline int cmd_sweep(const CommonOptions& o, const std::vector<int>& bins, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  const TrainConfig config = load_any_config(o.config, o.overrides);
  const auto dir = o.output_dir();
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  csv << kSweepHeader << '\n';
  nlohmann::json rows = nlohmann::json::array();
  discretization_sweep(config, bins, {Algorithm::kBpo, Algorithm::kBpoMinus}, [&](const SweepRow& row) {
    write_sweep_row(csv, row);
    csv.flush();
    rows.push_back({{"K", row.bins},
                    {"algorithm", to_string(row.algorithm)},
                    {"mean_return", row.eval.mean},
                    {"ci95", row.eval.ci95},
                    {"best_seed", row.best_seed}});
    if (!o.quiet) std::cerr << "K=" << row.bins << ' ' << to_string(row.algorithm) << ' ' << row.eval.mean << '\n';
  });
  Manifest m;
  m.command = "sweep";
  m.argv = argv;
  m.config = config;
  for (int k = 0; k < config.n_seeds; ++k) m.seeds.push_back(config.seed + static_cast<std::uint64_t>(k));
  m.results = {{"rows", rows}, {"bins", bins}};
  m.outputs = {"sweep.csv"};
  m.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir / "manifest.json", m);
  return kExitOk;
}

struct RolloutOptions {
  std::string checkpoint;
  int episodes = 5;
  std::optional<std::uint64_t> seed;
  std::string latent;  // pins the latent, e.g. the Light-Dark start "2,2"
  std::string goal;    // Light-Dark goal "x,y"
};

inline int cmd_rollout(const CommonOptions& o, const RolloutOptions& r, const std::vector<std::string>& argv) {
  TrainConfig config;
  Vector theta;
  if (!r.checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(r.checkpoint);
    detail::apply_eval_overrides(ck.config, o.overrides);
    config = ck.config;
    theta = ck.policy;
  } else if (!o.config.empty()) {
    config = load_any_config(o.config, o.overrides);
    Rng init = make_stream(config.seed, kInitStream, 0);
    theta = Agent(config).policy().init_params(init);
  } else {
    throw ConfigError("rollout needs --checkpoint or --config");
  }
  const Agent agent(config);
  std::optional<LatentVector> latent;
  if (!r.latent.empty()) {
    const auto v = detail::parse_vector(r.latent, "--latent");
    if (static_cast<int>(v.size()) != agent.spec().latent_dim())
      throw ConfigError("--latent needs " + std::to_string(agent.spec().latent_dim()) + " values");
    latent = Eigen::Map<const LatentVector>(v.data(), static_cast<Index>(v.size()));
  }
  auto env = agent.environment().clone();
  if (!r.goal.empty()) {
    auto* ld = dynamic_cast<LightDarkEnv*>(env.get());
    if (!ld) throw ConfigError("--goal applies to light_dark only");
    const auto g = detail::parse_vector(r.goal, "--goal");
    if (g.size() != 2) throw ConfigError("--goal needs 2 values");
    ld->pin_goal(Eigen::Vector2d(g[0], g[1]));
  }
  const auto dir = o.output_dir();
  const std::uint64_t seed = r.seed.value_or(config.eval_seed);
  Manifest m;
  m.command = "rollout";
  m.argv = argv;
  m.config = config;
  m.seeds = {seed};
  nlohmann::json returns = nlohmann::json::array();
  for (int i = 0; i < r.episodes; ++i) {
    Rng rng = make_stream(seed, kEvalStream, static_cast<std::uint64_t>(i));
    Trajectory traj = run_episode(agent, theta, *env, rng, latent);
    traj.seed = stream_key(seed, kEvalStream, static_cast<std::uint64_t>(i));
    const std::string name = "rollout_" + std::to_string(i) + ".csv";
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + name);
    write_trajectory_csv(os, traj, agent.spec().name);
    m.outputs.push_back(name);
    returns.push_back(traj.discounted_return(config.discount));
  }
  m.results = {{"returns", returns}};
  write_manifest(dir / "rollout_manifest.json", m);
  if (!o.quiet) std::cerr << "wrote " << r.episodes << " rollouts to " << dir.string() << '\n';
  return kExitOk;
}

struct OracleOptions {
  double accuracy = 0.85;
  double discount = 0.95;
  int resolution = 1001;
  double tolerance = 1e-8;
  std::string csv;
};

inline int cmd_oracle(const OracleOptions& opt) {
  const TigerOracleResult r =
      tiger_value_iteration_oracle(opt.accuracy, opt.discount, opt.resolution, opt.tolerance);
  std::cout.precision(10);
  std::cout << "V*(uniform) = " << r.value_at_uniform << " (" << r.iterations << " iterations, residual "
            << r.residual << ")\n";
  // Report the belief thresholds where the greedy action changes.
  for (std::size_t i = 1; i < r.grid.size(); ++i)
    if (r.greedy[i] != r.greedy[i - 1])
      std::cout << "greedy action changes at P(tiger left) = " << r.grid[i] << '\n';
  if (!opt.csv.empty()) {
    std::ofstream os(opt.csv);
    if (!os) throw std::runtime_error("cannot write " + opt.csv);
    os.precision(std::numeric_limits<double>::max_digits10);
    os << "p_left,value,action\n";
    static const char* names[] = {"listen", "open_left", "open_right"};
    for (std::size_t i = 0; i < r.grid.size(); ++i)
      os << r.grid[i] << ',' << r.values[i] << ',' << names[static_cast<int>(r.greedy[i])] << '\n';
  }
  return kExitOk;
}

struct PlotOptions {
  std::vector<std::string> diagnostics;
  std::vector<std::string> trajectories;
};

inline int cmd_plot(const CommonOptions& o, const PlotOptions& p) {
  if (p.diagnostics.empty() && p.trajectories.empty())
    throw ConfigError("plot needs --diagnostics and/or --trajectories files");
  const auto dir = o.output_dir();
  const auto paths = [](const std::vector<std::string>& v) {
    return std::vector<std::filesystem::path>(v.begin(), v.end());
  };
  if (!p.diagnostics.empty()) save_svg(dir / "learning_curve.svg", learning_curve_chart(paths(p.diagnostics)));
  if (!p.trajectories.empty()) {
    save_svg(dir / "belief_entropy.svg", entropy_chart(paths(p.trajectories)));
    if (read_csv(p.trajectories.front()).column("b_mean0") >= 0 &&
        read_csv(p.trajectories.front()).column("latent0") >= 0)
      save_svg(dir / "light_dark_paths.svg", light_dark_chart(paths(p.trajectories)));
  }
  if (!o.quiet) std::cerr << "wrote plots to " << dir.string() << '\n';
  return kExitOk;
}

/// Entry point shared by the executable and the tests. Exit codes: 0 success,
/// 2 usage or config error, 3 runtime failure.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"Bayesian policy optimization experiments"};
  app.require_subcommand(1);
  const auto argv_vec = detail::args_of(argc, argv);

  CommonOptions common;
  const auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("-c,--config", common.config, "INI config, or a manifest/checkpoint JSON");
    sub->add_option("--set", common.overrides, "override, e.g. --set train.n_itr=50")->take_all();
    sub->add_option("-o,--output", common.output,
                    std::string("output directory (default $") + kOutputDirEnv + " or ./bpo_runs)");
    sub->add_flag("-q,--quiet", common.quiet, "no progress output");
  };

  auto* train = app.add_subcommand("train", "train every seed, save the best checkpoint, diagnostics and manifest");
  add_common(train, true);
  train->get_option("--config")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on fresh latent draws");
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
  add_common(eval, false);

  auto* sweep = app.add_subcommand("sweep", "latent discretization sweep for bpo and bpo_minus");
  std::vector<int> bins = kDefaultSweepBins;
  sweep->add_option("--bins", bins, "bins per latent dimension")->delimiter(',');
  add_common(sweep, true);
  sweep->get_option("--config")->required();

  auto* rollout = app.add_subcommand("rollout", "dump per-step trajectories with beliefs");
  RolloutOptions ro;
  std::uint64_t rollout_seed = 0;
  rollout->add_option("--checkpoint", ro.checkpoint, "trained checkpoint (else --config gives an untrained policy)");
  auto* seed_opt = rollout->add_option("--seed", rollout_seed, "rollout seed (default eval.seed)");
  rollout->add_option("-n,--episodes", ro.episodes, "number of rollouts")->check(CLI::PositiveNumber);
  rollout->add_option("--latent", ro.latent, "pin the latent, comma separated (Light-Dark: start x,y)");
  rollout->add_option("--goal", ro.goal, "Light-Dark goal x,y");
  add_common(rollout, true);

  auto* oracle = app.add_subcommand("oracle", "Tiger belief-grid value iteration");
  OracleOptions oo;
  oracle->add_option("--accuracy", oo.accuracy, "listen accuracy");
  oracle->add_option("--discount", oo.discount, "discount factor");
  oracle->add_option("--resolution", oo.resolution, "belief grid points");
  oracle->add_option("--tolerance", oo.tolerance, "Bellman residual tolerance");
  oracle->add_option("--csv", oo.csv, "write p_left,value,action to this file");

  auto* plot = app.add_subcommand("plot", "render diagnostics and trajectory CSVs to SVG");
  PlotOptions po;
  plot->add_option("--diagnostics", po.diagnostics, "diagnostics CSV files");
  plot->add_option("--trajectories", po.trajectories, "trajectory CSV files");
  add_common(plot, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(common, argv_vec);
    if (*eval) return cmd_eval(common, checkpoint, argv_vec);
    if (*sweep) return cmd_sweep(common, bins, argv_vec);
    if (*rollout) {
      if (*seed_opt) ro.seed = rollout_seed;
      return cmd_rollout(common, ro, argv_vec);
    }
    if (*oracle) return cmd_oracle(oo);
    if (*plot) return cmd_plot(common, po);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace bpo::cli
