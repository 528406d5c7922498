#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bpo/cli/commands.hpp"

namespace bpo {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(BPO_EXE) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config_path(const std::string& name) { return std::string(BPO_CONFIG_DIR) + "/" + name; }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bpo_cli_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

const char* kTinyTiger =
    "--set train.n_itr=3 train.n_seeds=2 train.batch_size=200 eval.episodes=5 net.hidden=8 -q";

TEST(Cli, UnknownConfigKeyExitsWithConfigErrorNamingTheKey) {
  const RunResult r = run_cli("train -c " + config_path("tiger.ini") + " --set train.not_a_key=3 -o " +
                              scratch_dir("badkey").string());
  EXPECT_EQ(r.exit_code, cli::kExitConfig);
  EXPECT_NE(r.output.find("train.not_a_key"), std::string::npos) << r.output;
}

TEST(Cli, InvalidValueExitsWithConfigError) {
  const RunResult r = run_cli("train -c " + config_path("tiger.ini") + " --set trpo.step_size=-1 -o " +
                              scratch_dir("badvalue").string());
  EXPECT_EQ(r.exit_code, cli::kExitConfig);
  EXPECT_NE(r.output.find("trpo.step_size"), std::string::npos) << r.output;
}

TEST(Cli, MissingCheckpointIsARuntimeError) {
  const RunResult r = run_cli("eval --checkpoint /nonexistent/checkpoint.json -o " + scratch_dir("missing").string());
  EXPECT_EQ(r.exit_code, cli::kExitRuntime) << r.output;
}

TEST(Cli, UnknownSubcommandIsAUsageError) { EXPECT_EQ(run_cli("frobnicate").exit_code, cli::kExitConfig); }

TEST(Cli, TrainWritesCheckpointDiagnosticsAndManifest) {
  const fs::path dir = scratch_dir("train");
  const RunResult r = run_cli("train -c " + config_path("tiger.ini") + " " + kTinyTiger + " -o " + dir.string());
  ASSERT_EQ(r.exit_code, cli::kExitOk) << r.output;
  ASSERT_TRUE(fs::exists(dir / "checkpoint.json"));
  EXPECT_EQ(first_line(dir / "diagnostics.csv"), kDiagnosticsHeader);
  EXPECT_TRUE(fs::exists(dir / "diagnostics_seed1.csv"));
  EXPECT_TRUE(fs::exists(dir / "diagnostics_seed2.csv"));
  const auto m = nlohmann::json::parse(cli::read_file(dir / "manifest.json"));
  EXPECT_EQ(m.at("seeds"), nlohmann::json::array({1, 2}));
  EXPECT_EQ(m.at("config").at("train.n_itr"), "3");
  EXPECT_EQ(m.at("results").at("per_seed").size(), 2u);
  EXPECT_EQ(m.at("binary_sha1").get<std::string>().size(), 40u);

  // The checkpoint evaluates, and a manifest doubles as a config.
  const RunResult e = run_cli("eval --checkpoint " + (dir / "checkpoint.json").string() + " --set eval.episodes=7 -o " +
                              dir.string());
  ASSERT_EQ(e.exit_code, cli::kExitOk) << e.output;
  std::ifstream eval_csv(dir / "eval.csv");
  int rows = -1;
  for (std::string line; std::getline(eval_csv, line);) ++rows;
  EXPECT_EQ(rows, 7);
  const RunResult again = run_cli("train -c " + (dir / "manifest.json").string() + " --set train.n_seeds=1 -q -o " +
                                  scratch_dir("retrain").string());
  EXPECT_EQ(again.exit_code, cli::kExitOk) << again.output;
}

TEST(Cli, EvalRejectsArchitectureOverrides) {
  const fs::path dir = scratch_dir("evalover");
  ASSERT_EQ(run_cli("train -c " + config_path("tiger.ini") + " " + kTinyTiger + " -o " + dir.string()).exit_code,
            cli::kExitOk);
  const RunResult e = run_cli("eval --checkpoint " + (dir / "checkpoint.json").string() + " --set net.hidden=4 -o " +
                              dir.string());
  EXPECT_EQ(e.exit_code, cli::kExitConfig);
  EXPECT_NE(e.output.find("net.hidden"), std::string::npos);
}

TEST(Cli, LightDarkRolloutHasGaussianBeliefColumns) {
  const fs::path dir = scratch_dir("rollout");
  const RunResult r = run_cli("rollout -c " + config_path("light_dark.ini") +
                              " --latent 2,2 --goal 0,0 -n 2 --seed 3 -q -o " + dir.string());
  ASSERT_EQ(r.exit_code, cli::kExitOk) << r.output;
  std::ifstream is(dir / "rollout_0.csv");
  std::string header, columns;
  std::getline(is, header);
  std::getline(is, columns);
  EXPECT_EQ(header.rfind("# {", 0), 0u);
  EXPECT_NE(columns.find("b_mean0,b_mean1,b_var0,b_var1"), std::string::npos) << columns;
  std::string row;
  std::getline(is, row);
  // t = 0: the observed state is the pinned goal, the belief starts at (2, 2).
  EXPECT_EQ(row.rfind("0,0,0,2,2,", 0), 0u) << row;
  EXPECT_TRUE(fs::exists(dir / "rollout_1.csv"));
}

TEST(Cli, RolloutGoalRequiresLightDark) {
  const RunResult r =
      run_cli("rollout -c " + config_path("tiger.ini") + " --goal 0,0 -q -o " + scratch_dir("goal").string());
  EXPECT_EQ(r.exit_code, cli::kExitConfig);
}

TEST(Cli, OracleReportsValueAndWritesCsv) {
  const fs::path dir = scratch_dir("oracle");
  const RunResult r = run_cli("oracle --accuracy 0.85 --discount 0.95 --csv " + (dir / "v.csv").string());
  ASSERT_EQ(r.exit_code, cli::kExitOk) << r.output;
  EXPECT_NE(r.output.find("V*(uniform) = 1"), std::string::npos) << r.output;
  EXPECT_EQ(first_line(dir / "v.csv"), "p_left,value,action");
}

TEST(Cli, PlotRendersSvg) {
  const fs::path dir = scratch_dir("plot");
  ASSERT_EQ(run_cli("rollout -c " + config_path("light_dark.ini") + " -n 2 -q -o " + dir.string()).exit_code,
            cli::kExitOk);
  ASSERT_EQ(run_cli("train -c " + config_path("tiger.ini") + " " + kTinyTiger + " -o " + dir.string()).exit_code,
            cli::kExitOk);
  const RunResult r = run_cli("plot --diagnostics " + (dir / "diagnostics.csv").string() + " --trajectories " +
                              (dir / "rollout_0.csv").string() + " " + (dir / "rollout_1.csv").string() + " -q -o " +
                              dir.string());
  ASSERT_EQ(r.exit_code, cli::kExitOk) << r.output;
  for (const char* f : {"learning_curve.svg", "belief_entropy.svg", "light_dark_paths.svg"}) {
    ASSERT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(first_line(dir / f).rfind("<svg", 0), 0u) << f;
  }
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch_dir("envdir");
  const std::string cmd = std::string(cli::kOutputDirEnv) + "=" + dir.string() + " " + BPO_EXE + " rollout -c " +
                          config_path("tiger.ini") + " -n 1 -q";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "rollout_0.csv"));
}

TEST(Manifest, GitBlobHash) {
  EXPECT_EQ(cli::git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(cli::git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TrainConfig c = TrainConfig::defaults(EnvId::kLightDark);
  c.hidden = 5;
  const Agent agent(c);
  Rng rng(1);
  cli::Checkpoint ck;
  ck.config = c;
  ck.policy = agent.policy().init_params(rng);
  ck.policy[0] = 0.1 + 0.2;  // not exactly representable in short decimal
  ck.policy[ck.policy.size() - 1] = -1.0 / 3.0;
  trpo::ValueFunction vf(agent.value_config(), rng);
  ck.value = vf.params();
  ck.value_shift = std::nextafter(1.0, 2.0);
  ck.value_scale = 1e-300;
  ck.meta = {{"seed", 1}};
  const fs::path path = scratch_dir("ckpt") / "c.json";
  cli::save_checkpoint(path.string(), ck);
  const cli::Checkpoint back = cli::load_checkpoint(path.string());
  EXPECT_EQ(back.policy, ck.policy);
  EXPECT_EQ(back.value, ck.value);
  EXPECT_EQ(back.value_shift, ck.value_shift);
  EXPECT_EQ(back.value_scale, ck.value_scale);
  EXPECT_EQ(cli::config_entries(back.config), cli::config_entries(ck.config));
}

TEST(Checkpoint, RejectsMismatchedShapes) {
  const TrainConfig c = TrainConfig::defaults(EnvId::kTiger);
  const Agent agent(c);
  Rng rng(2);
  cli::Checkpoint ck{c, agent.policy().init_params(rng), {}, 0.0, 1.0, {}};
  trpo::ValueFunction vf(agent.value_config(), rng);
  ck.value = vf.params();
  nlohmann::json j = cli::checkpoint_json(ck);
  j["config"]["net.hidden"] = "16";
  EXPECT_ANY_THROW(cli::checkpoint_from_json(j));
}

TEST(ConfigFile, IniRoundTrip) {
  TrainConfig c = cli::load_config(config_path("chain.ini"), {"env.chain_mode=semitied", "trpo.step_size=0.02"});
  EXPECT_EQ(c.env.chain_mode, ChainMode::kSemitied);
  EXPECT_EQ(c.step_size, 0.02);
  EXPECT_EQ(c.batch_size, 10000);
  std::ostringstream os;
  cli::write_ini(os, c);
  std::istringstream is(os.str());
  const TrainConfig back = cli::build_config(cli::read_ini(is));
  EXPECT_EQ(cli::config_entries(back), cli::config_entries(c));
}

TEST(ConfigFile, Errors) {
  std::istringstream no_env("[train]\nn_itr = 3\n");
  EXPECT_THROW(cli::build_config(cli::read_ini(no_env)), ConfigError);
  std::istringstream bad_number("[env]\nname = tiger\n[train]\nn_itr = three\n");
  EXPECT_THROW(cli::build_config(cli::read_ini(bad_number)), ConfigError);
  EXPECT_THROW(cli::parse_overrides({"no_equals_sign"}), ConfigError);
  EXPECT_THROW(cli::load_config("/nonexistent.ini"), ConfigError);
}

TEST(ConfigFile, SampleConfigsLoad) {
  EXPECT_EQ(cli::load_config(config_path("tiger.ini")).env.id, EnvId::kTiger);
  EXPECT_EQ(cli::load_config(config_path("chain.ini")).env.id, EnvId::kChain);
  const TrainConfig ld = cli::load_config(config_path("light_dark.ini"));
  EXPECT_EQ(ld.env.id, EnvId::kLightDark);
  EXPECT_EQ(ld.horizon, 15);
}

}  // namespace
}  // namespace bpo
